//! Instance-level average precision: region-based (AP^r), part-based (AP^p)
//! and characterized-region (AP^cr), all volume-averaged over IoU thresholds.
//!
//! Every metric reduces to the same pipeline. Units of one class are pooled
//! over all images, predictions are ranked by score (ties by ingest order),
//! each prediction greedily takes the highest-IoU unconsumed ground-truth
//! unit of its own image, and AP is the all-point interpolated area under
//! the precision/recall curve.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maskcore::{mask_iou, BinaryMask, LabelMap, MaskBuilder, Task};
use crate::ordered::OrderedMap;
use crate::taxonomy::Taxonomy;

pub const TIE_BREAK: &str = "score_desc_then_ingest_order_asc";
pub const INTEGRATION: &str = "all_point_precision_envelope";

/// IoU thresholds, strictly increasing inside (0, 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Thresholds(Vec<f64>);

impl Thresholds {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidConfig("threshold list is empty".into()));
        }
        if values.iter().any(|&t| !(t > 0.0 && t < 1.0)) {
            return Err(Error::InvalidConfig(format!("thresholds must lie in (0,1): {values:?}")));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(format!(
                "thresholds must be strictly increasing: {values:?}"
            )));
        }
        Ok(Self(values))
    }

    /// `lo, lo + step, ...` up to `hi` inclusive, snapped to 1e-10 so that
    /// `0.1:0.9:0.1` yields exactly `0.3` rather than `0.30000000000000004`.
    pub fn range(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if step.is_nan() || step <= 0.0 {
            return Err(Error::InvalidConfig(format!("threshold step must be positive: {step}")));
        }
        let count = ((hi - lo) / step + 1e-9).floor();
        if count < 0.0 {
            return Err(Error::InvalidConfig(format!("empty threshold range {lo}:{hi}")));
        }
        let values = (0..=count as usize)
            .map(|i| ((lo + i as f64 * step) * 1e10).round() / 1e10)
            .collect();
        Self::new(values)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for Thresholds {
    fn default() -> Self {
        Self::range(0.1, 0.9, 0.1).unwrap()
    }
}

impl FromStr for Thresholds {
    type Err = Error;

    /// Accepts `lo:hi:step` or a comma-separated list.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("cannot parse thresholds `{s}`"));
        let parse = |p: &str| p.trim().parse::<f64>().map_err(|_| bad());
        if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            if parts.len() != 3 {
                return Err(bad());
            }
            Self::range(parse(parts[0])?, parse(parts[1])?, parse(parts[2])?)
        } else {
            Self::new(s.split(',').map(parse).collect::<Result<_>>()?)
        }
    }
}

impl TryFrom<Vec<f64>> for Thresholds {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<Thresholds> for Vec<f64> {
    fn from(t: Thresholds) -> Self {
        t.0
    }
}

/// How characterized units are cut out of a person.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    /// One unit per (instance, attribute region, characteristic class).
    #[default]
    PerAttributeRegion,
    /// One unit per (instance, characteristic class), pooled over attributes.
    PerInstance,
}

impl FromStr for Granularity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per_attribute_region" => Ok(Self::PerAttributeRegion),
            "per_instance" => Ok(Self::PerInstance),
            other => Err(Error::InvalidConfig(format!("unknown unit granularity `{other}`"))),
        }
    }
}

/// A person instance: its mask and, for predictions, its detection score.
#[derive(Debug, Clone)]
pub struct Instance {
    pub id: u32,
    pub mask: BinaryMask,
    pub score: Option<f64>,
}

/// Splits an instance map into one mask per non-zero id, ascending by id.
pub fn instances_from_map(instance_map: &LabelMap, scores: Option<&[f64]>) -> Result<Vec<Instance>> {
    let (w, h) = instance_map.dims();
    let mut builders: Vec<Option<MaskBuilder>> = Vec::new();
    for (idx, &id) in instance_map.data().iter().enumerate() {
        if id == 0 {
            continue;
        }
        let slot = id as usize;
        if slot >= builders.len() {
            builders.resize_with(slot + 1, || None);
        }
        match &mut builders[slot] {
            Some(b) => b.set(idx),
            empty => {
                let mut b = MaskBuilder::new(w, h)?;
                b.set(idx);
                *empty = Some(b);
            }
        }
    }
    let mut instances = Vec::new();
    for (id, builder) in builders.into_iter().enumerate() {
        if let Some(b) = builder {
            let score = match scores {
                Some(s) => Some(*s.get(id - 1).ok_or_else(|| {
                    Error::InvalidConfig(format!("no score for instance {id}"))
                })?),
                None => None,
            };
            instances.push(Instance {
                id: id as u32,
                mask: b.finish(),
                score,
            });
        }
    }
    Ok(instances)
}

/// The atom matched by every AP metric.
#[derive(Debug, Clone)]
pub struct EvalUnit {
    pub image_id: String,
    pub instance_id: u32,
    /// Attribute class for AP^r, characteristic class for AP^cr.
    pub class_id: u16,
    /// Attribute region a characterized unit was cut from (0 when pooled per instance).
    pub attribute_id: u16,
    pub mask: BinaryMask,
    pub score: Option<f64>,
    pub ingest_order: u64,
}

fn ensure_dims(mask: &BinaryMask, map: &LabelMap) -> Result<()> {
    if mask.dims() != map.dims() {
        return Err(Error::DimensionMismatch {
            expected: map.dims(),
            found: mask.dims(),
        });
    }
    Ok(())
}

fn out_of_range(map: &LabelMap, value: u16) -> Error {
    Error::ClassOutOfRange {
        task: map.task(),
        class: value as u32,
        max: map.task().max_class() as u32,
    }
}

/// Region units for instances given as masks. Units come out ordered by
/// instance, then class, and are numbered from 0.
pub fn region_units_from_instances(
    instances: &[Instance],
    attribute_map: &LabelMap,
    image_id: &str,
) -> Result<Vec<EvalUnit>> {
    let (w, h) = attribute_map.dims();
    let n = attribute_map.task().max_class() as usize + 1;
    let data = attribute_map.data();
    let mut units = Vec::new();
    for inst in instances {
        ensure_dims(&inst.mask, attribute_map)?;
        let mut builders: Vec<Option<MaskBuilder>> = vec![None; n];
        for idx in inst.mask.ones() {
            let a = data[idx];
            if a == 0 {
                continue;
            }
            let slot = builders.get_mut(a as usize).ok_or_else(|| out_of_range(attribute_map, a))?;
            slot.get_or_insert_with(|| MaskBuilder::new(w, h).unwrap()).set(idx);
        }
        for (class, builder) in builders.into_iter().enumerate() {
            if let Some(b) = builder {
                units.push(EvalUnit {
                    image_id: image_id.to_owned(),
                    instance_id: inst.id,
                    class_id: class as u16,
                    attribute_id: class as u16,
                    mask: b.finish(),
                    score: inst.score,
                    ingest_order: units.len() as u64,
                });
            }
        }
    }
    Ok(units)
}

/// One unit per (instance, attribute class) with a non-empty intersection.
/// `scores[i]` is the score of instance id `i + 1`.
pub fn extract_region_units(
    instance_map: &LabelMap,
    attribute_map: &LabelMap,
    image_id: &str,
    scores: Option<&[f64]>,
) -> Result<Vec<EvalUnit>> {
    instance_map.ensure_same_dims(attribute_map)?;
    let instances = instances_from_map(instance_map, scores)?;
    region_units_from_instances(&instances, attribute_map, image_id)
}

/// Characterized units for instances given as masks: pixels of the instance
/// whose attribute is characterizable, split by characteristic class (and by
/// attribute region unless pooling per instance).
pub fn characterized_units_from_instances(
    instances: &[Instance],
    attribute_map: &LabelMap,
    characteristic_map: &LabelMap,
    taxonomy: &Taxonomy,
    granularity: Granularity,
    image_id: &str,
) -> Result<Vec<EvalUnit>> {
    let task = characteristic_map.task();
    if !task.is_characteristic() {
        return Err(Error::NotACharacteristicTask(task));
    }
    attribute_map.ensure_same_dims(characteristic_map)?;
    let (w, h) = attribute_map.dims();
    let eligible = taxonomy.characterizable_table();
    let n_attr = eligible.len();
    let n_char = task.max_class() as usize + 1;
    let attrs = attribute_map.data();
    let chars = characteristic_map.data();

    let mut units = Vec::new();
    for inst in instances {
        ensure_dims(&inst.mask, attribute_map)?;
        let mut builders: Vec<Option<MaskBuilder>> = vec![None; n_attr * n_char];
        for idx in inst.mask.ones() {
            let (a, k) = (attrs[idx], chars[idx]);
            if a == 0 || k == 0 {
                continue;
            }
            if a as usize >= n_attr {
                return Err(out_of_range(attribute_map, a));
            }
            if k as usize >= n_char {
                return Err(out_of_range(characteristic_map, k));
            }
            if !eligible[a as usize] {
                continue;
            }
            let key = match granularity {
                Granularity::PerAttributeRegion => a as usize * n_char + k as usize,
                Granularity::PerInstance => k as usize,
            };
            builders[key].get_or_insert_with(|| MaskBuilder::new(w, h).unwrap()).set(idx);
        }
        for (key, builder) in builders.into_iter().enumerate() {
            if let Some(b) = builder {
                let (a, k) = (key / n_char, key % n_char);
                units.push(EvalUnit {
                    image_id: image_id.to_owned(),
                    instance_id: inst.id,
                    class_id: k as u16,
                    attribute_id: a as u16,
                    mask: b.finish(),
                    score: inst.score,
                    ingest_order: units.len() as u64,
                });
            }
        }
    }
    Ok(units)
}

#[allow(clippy::too_many_arguments)]
pub fn extract_characterized_units(
    instance_map: &LabelMap,
    attribute_map: &LabelMap,
    characteristic_map: &LabelMap,
    taxonomy: &Taxonomy,
    task: Task,
    image_id: &str,
    scores: Option<&[f64]>,
    granularity: Granularity,
) -> Result<Vec<EvalUnit>> {
    if !task.is_characteristic() {
        return Err(Error::NotACharacteristicTask(task));
    }
    if characteristic_map.task() != task {
        return Err(Error::InvalidConfig(format!(
            "expected a {task} map, got {}",
            characteristic_map.task()
        )));
    }
    instance_map.ensure_same_dims(attribute_map)?;
    let instances = instances_from_map(instance_map, scores)?;
    characterized_units_from_instances(
        &instances,
        attribute_map,
        characteristic_map,
        taxonomy,
        granularity,
        image_id,
    )
}

/// Outcome for one ranked prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredMatch {
    /// Position of the prediction in the caller's input.
    pub pred: usize,
    pub score: f64,
    /// Position of the consumed ground-truth unit, `None` for a false positive.
    pub gt: Option<usize>,
}

impl PredMatch {
    pub fn is_tp(&self) -> bool {
        self.gt.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub threshold: f64,
    /// Predictions in rank order.
    pub matches: Vec<PredMatch>,
    pub n_gt: usize,
}

impl MatchResult {
    pub fn true_positives(&self) -> usize {
        self.matches.iter().filter(|m| m.is_tp()).count()
    }
}

/// The predictions and ground truths of one class in one image, with the IoU
/// of every (prediction, ground truth) pair.
#[derive(Debug, Clone, Default)]
pub(crate) struct ImageClassEvidence {
    pub gt_ids: Vec<usize>,
    /// `(pred id, score, ingest order, IoU per ground truth)`
    pub preds: Vec<(usize, f64, u64, Vec<f64>)>,
}

#[derive(Debug, Clone)]
struct Candidate {
    id: usize,
    score: f64,
    order: u64,
    image: usize,
    ious: Vec<f64>,
}

/// All candidates of one class pooled across images.
#[derive(Debug, Clone, Default)]
pub(crate) struct ClassPool {
    gt_ids: Vec<Vec<usize>>,
    candidates: Vec<Candidate>,
    ranked: bool,
}

impl ClassPool {
    pub fn add_image(&mut self, evidence: ImageClassEvidence) {
        let image = self.gt_ids.len();
        for (id, score, order, ious) in evidence.preds {
            self.candidates.push(Candidate {
                id,
                score,
                order,
                image,
                ious,
            });
        }
        self.gt_ids.push(evidence.gt_ids);
        self.ranked = false;
    }

    pub fn n_gt(&self) -> usize {
        self.gt_ids.iter().map(Vec::len).sum()
    }

    fn rank(&mut self) {
        if !self.ranked {
            self.candidates.sort_by(|a, b| {
                b.score.total_cmp(&a.score).then(a.order.cmp(&b.order))
            });
            self.ranked = true;
        }
    }

    pub fn match_at(&mut self, threshold: f64) -> MatchResult {
        self.rank();
        let mut consumed: Vec<Vec<bool>> = self.gt_ids.iter().map(|g| vec![false; g.len()]).collect();
        let matches = self
            .candidates
            .iter()
            .map(|c| {
                let taken = &mut consumed[c.image];
                let mut best: Option<(usize, f64)> = None;
                for (g, &iou) in c.ious.iter().enumerate() {
                    if !taken[g] && best.is_none_or(|(_, b)| iou > b) {
                        best = Some((g, iou));
                    }
                }
                let gt = match best {
                    Some((g, iou)) if iou >= threshold => {
                        taken[g] = true;
                        Some(self.gt_ids[c.image][g])
                    }
                    _ => None,
                };
                PredMatch {
                    pred: c.id,
                    score: c.score,
                    gt,
                }
            })
            .collect();
        MatchResult {
            threshold,
            matches,
            n_gt: self.n_gt(),
        }
    }

    /// AP at each threshold, `None` when the class has no ground truth.
    pub fn ap_per_threshold(&mut self, thresholds: &Thresholds) -> Option<Vec<f64>> {
        if self.n_gt() == 0 {
            return None;
        }
        Some(
            thresholds
                .as_slice()
                .iter()
                .map(|&t| average_precision(&self.match_at(t)).unwrap())
                .collect(),
        )
    }
}

/// All-point interpolated AP: the sum of the precision envelope at each true
/// positive, divided by the number of ground truths.
pub fn average_precision(result: &MatchResult) -> Result<f64> {
    if result.n_gt == 0 {
        return Err(Error::NoGroundTruth);
    }
    let mut tp = 0usize;
    let precision: Vec<f64> = result
        .matches
        .iter()
        .enumerate()
        .map(|(k, m)| {
            tp += m.is_tp() as usize;
            tp as f64 / (k + 1) as f64
        })
        .collect();
    let mut envelope = precision;
    for k in (0..envelope.len().saturating_sub(1)).rev() {
        envelope[k] = envelope[k].max(envelope[k + 1]);
    }
    let area: f64 = result
        .matches
        .iter()
        .zip(&envelope)
        .filter(|(m, _)| m.is_tp())
        .fold(0.0, |acc, (_, &p)| acc + p);
    Ok(area / result.n_gt as f64)
}

fn unit_score(unit: &EvalUnit) -> Result<f64> {
    match unit.score {
        Some(s) if s.is_finite() => Ok(s),
        Some(s) => Err(Error::InvalidConfig(format!("non-finite score {s}"))),
        None => Err(Error::MissingScore),
    }
}

/// Groups units by image (first-appearance order across both lists) and
/// fills one class pool, computing IoUs with [`mask_iou`].
fn pool_units(preds: &[&(usize, &EvalUnit)], gts: &[&(usize, &EvalUnit)]) -> Result<ClassPool> {
    type Side<'u, 'e> = Vec<&'u (usize, &'e EvalUnit)>;
    let mut slots: HashMap<&str, usize> = HashMap::new();
    let mut per_image: Vec<(Side, Side)> = Vec::new();
    for (is_gt, unit) in gts.iter().map(|g| (true, *g)).chain(preds.iter().map(|p| (false, *p))) {
        let slot = *slots.entry(unit.1.image_id.as_str()).or_insert_with(|| {
            per_image.push((Vec::new(), Vec::new()));
            per_image.len() - 1
        });
        if is_gt {
            per_image[slot].1.push(unit);
        } else {
            per_image[slot].0.push(unit);
        }
    }
    let mut pool = ClassPool::default();
    for (image_preds, image_gts) in per_image {
        let mut evidence = ImageClassEvidence {
            gt_ids: image_gts.iter().map(|g| g.0).collect(),
            preds: Vec::with_capacity(image_preds.len()),
        };
        for p in image_preds {
            let ious = image_gts
                .iter()
                .map(|g| mask_iou(&p.1.mask, &g.1.mask))
                .collect::<Result<Vec<_>>>()?;
            evidence.preds.push((p.0, unit_score(p.1)?, p.1.ingest_order, ious));
        }
        pool.add_image(evidence);
    }
    Ok(pool)
}

/// Per-class evidence for the units of a single image, indexed by class id
/// (`0..=max_class`). Ids are positions in the input slices; predictions
/// with empty masks are skipped.
pub(crate) fn image_evidence_by_class(
    preds: &[EvalUnit],
    gts: &[EvalUnit],
    task: Task,
) -> Result<Vec<ImageClassEvidence>> {
    let n = task.max_class() as usize + 1;
    let check = |u: &EvalUnit| -> Result<usize> {
        let c = u.class_id as usize;
        if c >= n {
            return Err(Error::ClassOutOfRange {
                task,
                class: u.class_id as u32,
                max: task.max_class() as u32,
            });
        }
        Ok(c)
    };
    let mut gt_by_class: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, g) in gts.iter().enumerate() {
        gt_by_class[check(g)?].push(i);
    }
    let mut evidence: Vec<ImageClassEvidence> = gt_by_class
        .iter()
        .map(|ids| ImageClassEvidence {
            gt_ids: ids.clone(),
            preds: Vec::new(),
        })
        .collect();
    for (i, p) in preds.iter().enumerate() {
        if p.mask.is_empty() {
            continue;
        }
        let c = check(p)?;
        let ious = gt_by_class[c]
            .iter()
            .map(|&g| mask_iou(&p.mask, &gts[g].mask))
            .collect::<Result<Vec<_>>>()?;
        evidence[c].preds.push((i, unit_score(p)?, p.ingest_order, ious));
    }
    Ok(evidence)
}

/// Score-ranked greedy matching of one class's units at one threshold.
/// Prediction and ground-truth ids in the result are positions in the input
/// slices. Predictions with empty masks are dropped before matching.
pub fn greedy_match(preds: &[EvalUnit], gts: &[EvalUnit], threshold: f64) -> Result<MatchResult> {
    let mut class: Option<u16> = None;
    for u in preds.iter().chain(gts) {
        match class {
            None => class = Some(u.class_id),
            Some(c) if c != u.class_id => {
                return Err(Error::MixedClasses {
                    first: c,
                    second: u.class_id,
                })
            }
            _ => {}
        }
    }
    let preds: Vec<(usize, &EvalUnit)> =
        preds.iter().enumerate().filter(|(_, u)| !u.mask.is_empty()).collect();
    let gts: Vec<(usize, &EvalUnit)> = gts.iter().enumerate().collect();
    let p: Vec<_> = preds.iter().collect();
    let g: Vec<_> = gts.iter().collect();
    let mut pool = pool_units(&p, &g)?;
    Ok(pool.match_at(threshold))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApMetric {
    ApR,
    ApP,
    ApCr,
}

impl ApMetric {
    pub fn label(self) -> &'static str {
        match self {
            ApMetric::ApR => "AP^r_vol",
            ApMetric::ApP => "AP^p_vol",
            ApMetric::ApCr => "AP^cr_vol",
        }
    }
}

impl fmt::Display for ApMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassAp {
    pub per_threshold: Vec<f64>,
    pub volume: f64,
}

impl ClassAp {
    pub fn from_per_threshold(per_threshold: Vec<f64>) -> Self {
        let volume = per_threshold.iter().sum::<f64>() / per_threshold.len() as f64;
        Self {
            per_threshold,
            volume,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApConfig {
    pub tie_break: String,
    pub integration: String,
    pub thresholds: Thresholds,
    pub discard_empty_pred_units: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit_granularity: Option<Granularity>,
}

impl ApConfig {
    pub fn new(thresholds: &Thresholds, granularity: Option<Granularity>) -> Self {
        Self {
            tie_break: TIE_BREAK.into(),
            integration: INTEGRATION.into(),
            thresholds: thresholds.clone(),
            discard_empty_pred_units: true,
            unit_granularity: granularity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApReport {
    pub metric: ApMetric,
    /// Label space of the classes: attribute for AP^r, the characteristic
    /// task for AP^cr, absent for AP^p.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<Task>,
    pub thresholds: Vec<f64>,
    pub per_class: OrderedMap<Option<ClassAp>>,
    pub overall: Option<f64>,
    pub config: ApConfig,
}

impl ApReport {
    /// Assembles a report from per-class threshold curves (`None` = no GT).
    pub fn assemble(
        metric: ApMetric,
        task: Option<Task>,
        classes: Vec<(String, Option<Vec<f64>>)>,
        config: ApConfig,
    ) -> Self {
        let per_class: OrderedMap<Option<ClassAp>> = classes
            .into_iter()
            .map(|(name, curve)| (name, curve.map(ClassAp::from_per_threshold)))
            .collect();
        let volumes: Vec<f64> = per_class.values().flatten().map(|c| c.volume).collect();
        let overall =
            (!volumes.is_empty()).then(|| volumes.iter().sum::<f64>() / volumes.len() as f64);
        Self {
            metric,
            task,
            thresholds: config.thresholds.as_slice().to_vec(),
            per_class,
            overall,
            config,
        }
    }

    pub fn volume(&self, class: &str) -> Option<f64> {
        self.per_class.get(class).and_then(|c| c.as_ref()).map(|c| c.volume)
    }
}

fn class_report(
    metric: ApMetric,
    task: Task,
    gt_units: &[EvalUnit],
    pred_units: &[EvalUnit],
    thresholds: &Thresholds,
    taxonomy: &Taxonomy,
    granularity: Option<Granularity>,
) -> Result<ApReport> {
    let catalog = taxonomy.catalog(task);
    let n = catalog.class_count();
    let mut gts: Vec<Vec<(usize, &EvalUnit)>> = vec![Vec::new(); n + 1];
    let mut preds: Vec<Vec<(usize, &EvalUnit)>> = vec![Vec::new(); n + 1];
    for (i, u) in gt_units.iter().enumerate() {
        let slot = gts.get_mut(u.class_id as usize).ok_or(Error::ClassOutOfRange {
            task,
            class: u.class_id as u32,
            max: n as u32,
        })?;
        slot.push((i, u));
    }
    for (i, u) in pred_units.iter().enumerate() {
        if u.mask.is_empty() {
            continue;
        }
        let slot = preds.get_mut(u.class_id as usize).ok_or(Error::ClassOutOfRange {
            task,
            class: u.class_id as u32,
            max: n as u32,
        })?;
        slot.push((i, u));
    }
    let mut classes = Vec::with_capacity(n);
    for c in 1..=n {
        let p: Vec<_> = preds[c].iter().collect();
        let g: Vec<_> = gts[c].iter().collect();
        let mut pool = pool_units(&p, &g)?;
        classes.push((catalog.name(c as u16).to_owned(), pool.ap_per_threshold(thresholds)));
    }
    Ok(ApReport::assemble(
        metric,
        Some(task),
        classes,
        ApConfig::new(thresholds, granularity),
    ))
}

/// AP^r_vol over region units pooled across images.
pub fn ap_r_vol(
    gt_units: &[EvalUnit],
    pred_units: &[EvalUnit],
    thresholds: &Thresholds,
    taxonomy: &Taxonomy,
) -> Result<ApReport> {
    class_report(ApMetric::ApR, Task::Attribute, gt_units, pred_units, thresholds, taxonomy, None)
}

/// AP^cr_vol over characterized units of one characteristic task. Units are
/// matched by characteristic class and image only, so the attribute a
/// prediction was cut from does not need to agree with the ground truth's.
pub fn ap_cr_vol(
    gt_units: &[EvalUnit],
    pred_units: &[EvalUnit],
    thresholds: &Thresholds,
    taxonomy: &Taxonomy,
    task: Task,
    granularity: Granularity,
) -> Result<ApReport> {
    if !task.is_characteristic() {
        return Err(Error::NotACharacteristicTask(task));
    }
    class_report(ApMetric::ApCr, task, gt_units, pred_units, thresholds, taxonomy, Some(granularity))
}

/// A person with its parsed parts, the unit of AP^p.
#[derive(Debug, Clone)]
pub struct PersonUnit {
    pub image_id: String,
    pub instance_id: u32,
    pub mask: BinaryMask,
    /// `(attribute class, part mask)` ascending by class; parts lie inside `mask`.
    pub parts: Vec<(u16, BinaryMask)>,
    pub score: Option<f64>,
    pub ingest_order: u64,
}

impl PersonUnit {
    /// Restricts `attribute_map` to the person's mask.
    pub fn from_maps(
        image_id: &str,
        instance: &Instance,
        attribute_map: &LabelMap,
        ingest_order: u64,
    ) -> Result<Self> {
        let parts = region_units_from_instances(std::slice::from_ref(instance), attribute_map, image_id)?
            .into_iter()
            .map(|u| (u.class_id, u.mask))
            .collect();
        Ok(Self {
            image_id: image_id.to_owned(),
            instance_id: instance.id,
            mask: instance.mask.clone(),
            parts,
            score: instance.score,
            ingest_order,
        })
    }

    /// Regroups region units (as produced by [`region_units_from_instances`])
    /// under their instances.
    pub fn group(instances: &[Instance], region_units: Vec<EvalUnit>, image_id: &str) -> Vec<Self> {
        let mut persons: Vec<PersonUnit> = instances
            .iter()
            .enumerate()
            .map(|(i, inst)| PersonUnit {
                image_id: image_id.to_owned(),
                instance_id: inst.id,
                mask: inst.mask.clone(),
                parts: Vec::new(),
                score: inst.score,
                ingest_order: i as u64,
            })
            .collect();
        let index: HashMap<u32, usize> =
            instances.iter().enumerate().map(|(i, inst)| (inst.id, i)).collect();
        for u in region_units {
            persons[index[&u.instance_id]].parts.push((u.class_id, u.mask));
        }
        persons
    }

    fn part(&self, class: u16) -> Option<&BinaryMask> {
        self.parts
            .binary_search_by_key(&class, |(c, _)| *c)
            .ok()
            .map(|i| &self.parts[i].1)
    }
}

/// Mean part IoU over the classes present in either person.
pub fn person_match_score(pred: &PersonUnit, gt: &PersonUnit) -> Result<f64> {
    let mut classes: Vec<u16> = pred.parts.iter().chain(&gt.parts).map(|(c, _)| *c).collect();
    classes.sort_unstable();
    classes.dedup();
    if classes.is_empty() {
        return Err(Error::BothEmpty);
    }
    let overlap = pred.mask.intersects(&gt.mask)?;
    let mut sum = 0.0;
    for &c in &classes {
        if !overlap {
            continue;
        }
        if let (Some(p), Some(g)) = (pred.part(c), gt.part(c)) {
            sum += mask_iou(p, g)?;
        }
    }
    Ok(sum / classes.len() as f64)
}

/// Matching score for AP^p; persons without any part fall back to the IoU of
/// their masks.
pub(crate) fn person_pair_score(pred: &PersonUnit, gt: &PersonUnit) -> Result<f64> {
    match person_match_score(pred, gt) {
        Err(Error::BothEmpty) => mask_iou(&pred.mask, &gt.mask),
        other => other,
    }
}

pub const PERSON_CLASS: &str = "person";

/// Evidence for AP^p in one image.
pub(crate) fn person_evidence(
    preds: &[(usize, &PersonUnit)],
    gts: &[(usize, &PersonUnit)],
) -> Result<ImageClassEvidence> {
    let mut evidence = ImageClassEvidence {
        gt_ids: gts.iter().map(|g| g.0).collect(),
        preds: Vec::with_capacity(preds.len()),
    };
    for (id, p) in preds {
        let score = match p.score {
            Some(s) if s.is_finite() => s,
            Some(s) => return Err(Error::InvalidConfig(format!("non-finite score {s}"))),
            None => return Err(Error::MissingScore),
        };
        let ious = gts
            .iter()
            .map(|(_, g)| person_pair_score(p, g))
            .collect::<Result<Vec<_>>>()?;
        evidence.preds.push((*id, score, p.ingest_order, ious));
    }
    Ok(evidence)
}

type Indexed<'a> = Vec<(usize, &'a PersonUnit)>;

/// AP^p_vol: single-class AP over persons matched by [`person_match_score`].
pub fn ap_p_vol(
    gt_persons: &[PersonUnit],
    pred_persons: &[PersonUnit],
    thresholds: &Thresholds,
) -> Result<ApReport> {
    let mut order: Vec<&str> = Vec::new();
    let mut per_image: HashMap<&str, (Indexed, Indexed)> = HashMap::new();
    for (i, g) in gt_persons.iter().enumerate() {
        let e = per_image.entry(&g.image_id).or_insert_with(|| {
            order.push(&g.image_id);
            Default::default()
        });
        e.1.push((i, g));
    }
    for (i, p) in pred_persons.iter().enumerate().filter(|(_, p)| !p.mask.is_empty()) {
        let e = per_image.entry(&p.image_id).or_insert_with(|| {
            order.push(&p.image_id);
            Default::default()
        });
        e.0.push((i, p));
    }
    let mut pool = ClassPool::default();
    for id in order {
        let (p, g) = &per_image[id];
        pool.add_image(person_evidence(p, g)?);
    }
    Ok(ApReport::assemble(
        ApMetric::ApP,
        None,
        vec![(PERSON_CLASS.to_owned(), pool.ap_per_threshold(thresholds))],
        ApConfig::new(thresholds, None),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect(w: u32, h: u32, x0: u32, y0: u32, x1: u32, y1: u32) -> BinaryMask {
        BinaryMask::from_fn(w, h, |x, y| x >= x0 && x < x1 && y >= y0 && y < y1).unwrap()
    }

    fn unit(image: &str, class: u16, mask: BinaryMask, score: Option<f64>, order: u64) -> EvalUnit {
        EvalUnit {
            image_id: image.into(),
            instance_id: 1,
            class_id: class,
            attribute_id: class,
            mask,
            score,
            ingest_order: order,
        }
    }

    /// Ground truth g1 of area 10 and g2 of area 20 in a 10x10 image, plus
    /// predictions whose IoUs are 0.7/0.6 with g1 and 0.55 with g2.
    fn trace() -> (Vec<EvalUnit>, Vec<EvalUnit>) {
        let (w, h) = (10, 10);
        let g1 = rect(w, h, 0, 0, 10, 1);
        let g2 = rect(w, h, 0, 4, 10, 6);
        // 7 inside g1 -> 7/10
        let p1 = rect(w, h, 0, 0, 7, 1);
        // 6 inside g1 -> 6/10
        let p2 = rect(w, h, 0, 0, 6, 1);
        // 11 inside g2 -> 11/20
        let p3 = BinaryMask::from_fn(w, h, |x, y| y == 4 || (y == 5 && x == 0)).unwrap();
        let gts = vec![unit("a", 1, g1, None, 0), unit("a", 1, g2, None, 1)];
        let preds = vec![
            unit("a", 1, p1, Some(0.9), 0),
            unit("a", 1, p2, Some(0.8), 1),
            unit("a", 1, p3, Some(0.5), 2),
        ];
        (gts, preds)
    }

    #[test]
    fn trace_ious_as_designed() {
        let (gts, preds) = trace();
        assert_eq!(mask_iou(&preds[0].mask, &gts[0].mask).unwrap(), 0.7);
        assert_eq!(mask_iou(&preds[1].mask, &gts[0].mask).unwrap(), 0.6);
        assert_eq!(mask_iou(&preds[1].mask, &gts[1].mask).unwrap(), 0.0);
        assert_eq!(mask_iou(&preds[2].mask, &gts[1].mask).unwrap(), 0.55);
    }

    #[test]
    fn greedy_trace() {
        let (gts, preds) = trace();
        let r = greedy_match(&preds, &gts, 0.5).unwrap();
        let gt: Vec<_> = r.matches.iter().map(|m| (m.pred, m.gt)).collect();
        assert_eq!(gt, vec![(0, Some(0)), (1, None), (2, Some(1))]);
        assert_eq!(r.n_gt, 2);
        assert!((average_precision(&r).unwrap() - (0.5 + 0.5 * 2.0 / 3.0)).abs() < 1e-12);

        let r = greedy_match(&preds, &gts, 0.65).unwrap();
        assert_eq!(r.true_positives(), 1);
        assert!((average_precision(&r).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_pair_threshold_boundary() {
        let g = rect(10, 1, 0, 0, 10, 1);
        let p = rect(10, 1, 0, 0, 7, 1);
        let gts = [unit("a", 2, g, None, 0)];
        let preds = [unit("a", 2, p, Some(0.3), 0)];
        assert!(greedy_match(&preds, &gts, 0.5).unwrap().matches[0].is_tp());
        assert!(!greedy_match(&preds, &gts, 0.75).unwrap().matches[0].is_tp());
        assert!(greedy_match(&preds, &gts, 0.7).unwrap().matches[0].is_tp());
    }

    #[test]
    fn matching_never_crosses_images() {
        let g = rect(4, 4, 0, 0, 4, 4);
        let gts = [unit("a", 1, g.clone(), None, 0)];
        let preds = [unit("b", 1, g, Some(1.0), 0)];
        let r = greedy_match(&preds, &gts, 0.5).unwrap();
        assert_eq!(r.true_positives(), 0);
    }

    #[test]
    fn mixed_classes_rejected() {
        let m = rect(4, 4, 0, 0, 2, 2);
        let gts = [unit("a", 1, m.clone(), None, 0)];
        let preds = [unit("a", 2, m, Some(1.0), 0)];
        assert!(matches!(
            greedy_match(&preds, &gts, 0.5),
            Err(Error::MixedClasses { first: 2, second: 1 })
        ));
    }

    #[test]
    fn ties_break_by_ingest_order() {
        let g = rect(4, 1, 0, 0, 4, 1);
        let gts = [unit("a", 1, g.clone(), None, 0)];
        let preds = [
            unit("a", 1, rect(4, 1, 0, 0, 1, 1), Some(0.5), 7),
            unit("a", 1, g, Some(0.5), 3),
        ];
        let r = greedy_match(&preds, &gts, 0.5).unwrap();
        assert_eq!(r.matches[0].pred, 1);
        assert!(r.matches[0].is_tp());
    }

    #[test]
    fn ap_examples() {
        let tp = PredMatch { pred: 0, score: 0.8, gt: Some(0) };
        let fp = PredMatch { pred: 1, score: 0.9, gt: None };
        let r = MatchResult { threshold: 0.5, matches: vec![tp], n_gt: 1 };
        assert_eq!(average_precision(&r).unwrap(), 1.0);
        let r = MatchResult { threshold: 0.5, matches: vec![fp, tp], n_gt: 1 };
        assert_eq!(average_precision(&r).unwrap(), 0.5);
        let r = MatchResult { threshold: 0.5, matches: vec![], n_gt: 3 };
        assert_eq!(average_precision(&r).unwrap(), 0.0);
        let r = MatchResult { threshold: 0.5, matches: vec![fp], n_gt: 0 };
        assert!(matches!(average_precision(&r), Err(Error::NoGroundTruth)));
    }

    #[test]
    fn thresholds_parse() {
        let t = Thresholds::default();
        assert_eq!(t.as_slice(), &[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]);
        assert_eq!("0.1:0.9:0.1".parse::<Thresholds>().unwrap(), t);
        assert_eq!("0.5,0.75".parse::<Thresholds>().unwrap().as_slice(), &[0.5, 0.75]);
        assert!("0.5,0.5".parse::<Thresholds>().is_err());
        assert!("0:0.5:0.1".parse::<Thresholds>().is_err());
        assert!("0.5,1.0".parse::<Thresholds>().is_err());
        assert!("x".parse::<Thresholds>().is_err());
    }

    fn scene_maps() -> (LabelMap, LabelMap) {
        // 4x3: person 1 in columns 0-1, person 2 in columns 2-3.
        // Person 1: Hat (1) row 0, Face (13) rows 1-2.
        // Person 2: Hat row 0, Face row 1, row 2 background attribute.
        let inst = LabelMap::new(4, 3, Task::Instance, vec![1, 1, 2, 2, 1, 1, 2, 2, 1, 1, 2, 2]).unwrap();
        let attr = LabelMap::new(4, 3, Task::Attribute, vec![1, 1, 1, 1, 13, 13, 13, 13, 13, 13, 0, 0])
            .unwrap();
        (inst, attr)
    }

    #[test]
    fn region_unit_examples() {
        let inst = LabelMap::new(3, 2, Task::Instance, vec![1, 1, 1, 1, 1, 1]).unwrap();
        let attr = LabelMap::new(3, 2, Task::Attribute, vec![9; 6]).unwrap();
        let units = extract_region_units(&inst, &attr, "x", None).unwrap();
        assert_eq!(units.len(), 1);
        assert_eq!(units[0].class_id, 9);
        assert_eq!(units[0].mask.area(), 6);

        let empty = LabelMap::filled(3, 2, Task::Instance, 0).unwrap();
        assert!(extract_region_units(&empty, &attr, "x", None).unwrap().is_empty());

        let (inst, attr) = scene_maps();
        let units = extract_region_units(&inst, &attr, "x", Some(&[0.9, 0.4])).unwrap();
        let keys: Vec<_> = units.iter().map(|u| (u.instance_id, u.class_id, u.mask.area())).collect();
        assert_eq!(keys, vec![(1, 1, 2), (1, 13, 4), (2, 1, 2), (2, 13, 2)]);
        assert_eq!(units[2].score, Some(0.4));

        let small = LabelMap::filled(2, 2, Task::Attribute, 0).unwrap();
        assert!(matches!(
            extract_region_units(&inst, &small, "x", None),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn characterized_unit_examples() {
        let tax = Taxonomy::default();
        let id = |n: &str| tax.catalog(Task::Attribute).index_of(n).unwrap();
        let pants = id("Pants");
        let upper = id("UpperClothes");
        let face = id("Face");
        let long = tax.catalog(Task::Size).index_of("Long/large").unwrap();
        let red = tax.catalog(Task::Color).index_of("Red").unwrap();
        let dark = tax.catalog(Task::Color).index_of("Dark").unwrap();

        // Row 0: UpperClothes (Red | Red | Dark | Dark); row 1: Pants (Long); row 2: Face.
        let inst = LabelMap::new(4, 3, Task::Instance, vec![1; 12]).unwrap();
        let attr = LabelMap::new(
            4,
            3,
            Task::Attribute,
            [vec![upper; 4], vec![pants; 4], vec![face; 4]].concat(),
        )
        .unwrap();
        let size = LabelMap::new(4, 3, Task::Size, [vec![0; 4], vec![long; 4], vec![long; 4]].concat())
            .unwrap();
        let color = LabelMap::new(
            4,
            3,
            Task::Color,
            [vec![red, red, dark, dark], vec![0; 4], vec![red; 4]].concat(),
        )
        .unwrap();

        let g = Granularity::PerAttributeRegion;
        let units = extract_characterized_units(&inst, &attr, &size, &tax, Task::Size, "x", None, g).unwrap();
        assert_eq!(units.len(), 1);
        assert_eq!((units[0].class_id, units[0].attribute_id, units[0].mask.area()), (long, pants, 4));

        let units = extract_characterized_units(&inst, &attr, &color, &tax, Task::Color, "x", None, g).unwrap();
        let keys: Vec<_> = units.iter().map(|u| (u.attribute_id, u.class_id, u.mask.area())).collect();
        // Face pixels labelled Red contribute nothing.
        assert_eq!(keys, vec![(upper, dark, 2), (upper, red, 2)]);
        let union = units[0].mask.or(&units[1].mask).unwrap();
        assert_eq!(union.area(), 4);
        assert!(!units[0].mask.intersects(&units[1].mask).unwrap());

        assert!(matches!(
            extract_characterized_units(&inst, &attr, &attr, &tax, Task::Attribute, "x", None, g),
            Err(Error::NotACharacteristicTask(Task::Attribute))
        ));
    }

    #[test]
    fn per_instance_granularity_pools_attributes() {
        let tax = Taxonomy::default();
        let hat = tax.catalog(Task::Attribute).index_of("Hat").unwrap();
        let coat = tax.catalog(Task::Attribute).index_of("Coat").unwrap();
        let inst = LabelMap::new(2, 1, Task::Instance, vec![1, 1]).unwrap();
        let attr = LabelMap::new(2, 1, Task::Attribute, vec![hat, coat]).unwrap();
        let pattern = LabelMap::new(2, 1, Task::Pattern, vec![1, 1]).unwrap();
        let split = extract_characterized_units(
            &inst, &attr, &pattern, &tax, Task::Pattern, "x", None, Granularity::PerAttributeRegion,
        )
        .unwrap();
        assert_eq!(split.len(), 2);
        let pooled = extract_characterized_units(
            &inst, &attr, &pattern, &tax, Task::Pattern, "x", None, Granularity::PerInstance,
        )
        .unwrap();
        assert_eq!(pooled.len(), 1);
        assert_eq!(pooled[0].mask.area(), 2);
        assert_eq!(pooled[0].attribute_id, 0);
    }

    #[test]
    fn region_report_fixed_point_and_empty() {
        let tax = Taxonomy::default();
        let (inst, attr) = scene_maps();
        let gt = extract_region_units(&inst, &attr, "x", None).unwrap();
        let pred = extract_region_units(&inst, &attr, "x", Some(&[1.0, 1.0])).unwrap();
        let t = Thresholds::default();
        let report = ap_r_vol(&gt, &pred, &t, &tax).unwrap();
        assert_eq!(report.per_class.len(), 19);
        assert_eq!(report.overall, Some(1.0));
        assert_eq!(report.volume("Hat"), Some(1.0));
        assert_eq!(report.volume("Face"), Some(1.0));
        assert!(report.per_class.get("Pants").unwrap().is_none());

        let report = ap_r_vol(&gt, &[], &t, &tax).unwrap();
        assert_eq!(report.volume("Hat"), Some(0.0));
        assert_eq!(report.overall, Some(0.0));
    }

    fn person(parts: Vec<(u16, BinaryMask)>, mask: BinaryMask, score: Option<f64>) -> PersonUnit {
        PersonUnit {
            image_id: "x".into(),
            instance_id: 1,
            mask,
            parts,
            score,
            ingest_order: 0,
        }
    }

    #[test]
    fn person_score_examples() {
        let (w, h) = (10, 2);
        let body = rect(w, h, 0, 0, 10, 2);
        // part 1: IoU 8/10, part 2: IoU 4/10
        let g = person(
            vec![(1, rect(w, h, 0, 0, 10, 1)), (2, rect(w, h, 0, 1, 10, 2))],
            body.clone(),
            None,
        );
        let p = person(
            vec![(1, rect(w, h, 0, 0, 8, 1)), (2, rect(w, h, 0, 1, 4, 2))],
            body.clone(),
            Some(1.0),
        );
        assert!((person_match_score(&p, &g).unwrap() - 0.6).abs() < 1e-15);
        assert_eq!(person_match_score(&g, &g).unwrap(), 1.0);

        let extra = person(
            vec![(1, rect(w, h, 0, 0, 10, 1)), (3, rect(w, h, 0, 1, 10, 2))],
            body.clone(),
            Some(1.0),
        );
        let single = person(vec![(1, rect(w, h, 0, 0, 10, 1))], body.clone(), None);
        assert_eq!(person_match_score(&extra, &single).unwrap(), 0.5);

        let bare = person(vec![], body.clone(), None);
        assert!(matches!(person_match_score(&bare, &bare), Err(Error::BothEmpty)));
        assert_eq!(person_pair_score(&bare, &bare).unwrap(), 1.0);
    }

    #[test]
    fn part_report_examples() {
        let (inst, attr) = scene_maps();
        let instances = instances_from_map(&inst, None).unwrap();
        let gts: Vec<_> = instances
            .iter()
            .map(|i| PersonUnit::from_maps("x", i, &attr, 0).unwrap())
            .collect();
        let preds: Vec<_> = gts
            .iter()
            .cloned()
            .map(|mut p| {
                p.score = Some(1.0);
                p
            })
            .collect();
        let t = Thresholds::default();
        let r = ap_p_vol(&gts, &preds, &t).unwrap();
        assert_eq!(r.overall, Some(1.0));
        assert_eq!(r.per_class.keys().collect::<Vec<_>>(), vec![PERSON_CLASS]);
        assert_eq!(ap_p_vol(&gts, &[], &t).unwrap().overall, Some(0.0));
    }

    #[test]
    fn attribute_independence_of_cr() {
        let tax = Taxonomy::default();
        let pants = tax.catalog(Task::Attribute).index_of("Pants").unwrap();
        let skirt = tax.catalog(Task::Attribute).index_of("Skirt").unwrap();
        let long = tax.catalog(Task::Size).index_of("Long/large").unwrap();
        let inst = LabelMap::new(3, 3, Task::Instance, vec![1; 9]).unwrap();
        let gt_attr = LabelMap::new(3, 3, Task::Attribute, vec![pants; 9]).unwrap();
        let pred_attr = LabelMap::new(3, 3, Task::Attribute, vec![skirt; 9]).unwrap();
        let size = LabelMap::new(3, 3, Task::Size, vec![long; 9]).unwrap();
        let g = Granularity::PerAttributeRegion;
        let t = Thresholds::default();
        let gt = extract_characterized_units(&inst, &gt_attr, &size, &tax, Task::Size, "x", None, g).unwrap();
        let pr = extract_characterized_units(&inst, &pred_attr, &size, &tax, Task::Size, "x", Some(&[0.8]), g)
            .unwrap();
        let cr = ap_cr_vol(&gt, &pr, &t, &tax, Task::Size, g).unwrap();
        assert_eq!(cr.volume("Long/large"), Some(1.0));

        let gt = extract_region_units(&inst, &gt_attr, "x", None).unwrap();
        let pr = extract_region_units(&inst, &pred_attr, "x", Some(&[0.8])).unwrap();
        let r = ap_r_vol(&gt, &pr, &t, &tax).unwrap();
        assert_eq!(r.volume("Pants"), Some(0.0));
    }

    #[test]
    fn report_json_shape() {
        let tax = Taxonomy::default();
        let (inst, attr) = scene_maps();
        let gt = extract_region_units(&inst, &attr, "x", None).unwrap();
        let report = ap_r_vol(&gt, &[], &Thresholds::new(vec![0.5]).unwrap(), &tax).unwrap();
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json["metric"], "ap_r");
        assert_eq!(json["thresholds"], serde_json::json!([0.5]));
        assert_eq!(json["per_class"]["Hat"]["per_threshold"], serde_json::json!([0.0]));
        assert!(json["per_class"]["Pants"].is_null());
        assert_eq!(json["config"]["discard_empty_pred_units"], true);
        let back: ApReport = serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
        assert_eq!(back, report);
    }
}
