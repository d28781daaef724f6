//! Brute-force reference evaluator.
//!
//! Deliberately slow and written without any of the engine's extraction,
//! matching or integration code: masks are plain `Vec<bool>`, IoUs are
//! counted pixel by pixel, and AP comes from an explicit ranked table.

use crate::dataset_tools::manifest::{ImageSample, PredictionSample};
use crate::error::{Error, Result};
use crate::evaluate::{Engine, EvalConfig, EvalReport};
use crate::instance_metrics::{ApConfig, ApMetric, ApReport, ClassAp, Granularity};
use crate::maskcore::Task;
use crate::semantic_metrics::SemanticReport;
use crate::taxonomy::Taxonomy;
use crate::OrderedMap;

struct Unit {
    image: usize,
    class: u16,
    pixels: Vec<bool>,
    score: f64,
}

struct Person {
    image: usize,
    mask: Vec<bool>,
    /// Attribute value per pixel, 0 outside the person.
    parts: Vec<u16>,
    score: f64,
}

struct Inst {
    mask: Vec<bool>,
    score: f64,
}

struct View<'a> {
    attribute: &'a [u16],
    maps: [&'a [u16]; 4],
    instances: Vec<Inst>,
}

impl View<'_> {
    fn map(&self, task: Task) -> &[u16] {
        match task {
            Task::Attribute => self.maps[0],
            Task::Size => self.maps[1],
            Task::Pattern => self.maps[2],
            Task::Color => self.maps[3],
            Task::Instance => unreachable!(),
        }
    }
}

fn gt_view(s: &ImageSample) -> View<'_> {
    let ids = s.instance.data();
    let mut distinct: Vec<u16> = ids.iter().copied().filter(|&v| v != 0).collect();
    distinct.sort();
    distinct.dedup();
    let instances = distinct
        .into_iter()
        .map(|id| Inst {
            mask: ids.iter().map(|&v| v == id).collect(),
            score: 1.0,
        })
        .collect();
    View {
        attribute: s.attribute.data(),
        maps: [s.attribute.data(), s.size.data(), s.pattern.data(), s.color.data()],
        instances,
    }
}

fn pred_view(p: &PredictionSample) -> Result<View<'_>> {
    let mut instances = Vec::new();
    for inst in &p.instances {
        let score = match inst.score {
            Some(s) if s.is_finite() => s,
            Some(s) => return Err(Error::InvalidConfig(format!("non-finite score {s}"))),
            None => return Err(Error::MissingScore),
        };
        instances.push(Inst {
            mask: (0..inst.mask.pixel_count()).map(|i| inst.mask.get(i as u32 % p.width, i as u32 / p.width)).collect(),
            score,
        });
    }
    Ok(View {
        attribute: p.attribute.data(),
        maps: [p.attribute.data(), p.size.data(), p.pattern.data(), p.color.data()],
        instances,
    })
}

fn count(mask: &[bool]) -> u64 {
    let mut n = 0;
    for &b in mask {
        if b {
            n += 1;
        }
    }
    n
}

fn pixel_iou(a: &[bool], b: &[bool]) -> f64 {
    let mut inter = 0u64;
    let mut union = 0u64;
    for i in 0..a.len() {
        if a[i] && b[i] {
            inter += 1;
        }
        if a[i] || b[i] {
            union += 1;
        }
    }
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

fn region_units(view: &View, image: usize, out: &mut Vec<Unit>) {
    for inst in &view.instances {
        for a in 1..=Task::Attribute.max_class() {
            let pixels: Vec<bool> = (0..inst.mask.len()).map(|i| inst.mask[i] && view.attribute[i] == a).collect();
            if count(&pixels) > 0 {
                out.push(Unit {
                    image,
                    class: a,
                    pixels,
                    score: inst.score,
                });
            }
        }
    }
}

fn characterized_units(
    view: &View,
    image: usize,
    task: Task,
    characterizable: &[bool],
    granularity: Granularity,
    out: &mut Vec<Unit>,
) {
    let chars = view.map(task);
    let eligible = |a: u16| a != 0 && characterizable.get(a as usize).copied().unwrap_or(false);
    for inst in &view.instances {
        let attributes: Vec<Option<u16>> = match granularity {
            Granularity::PerAttributeRegion => (1..=Task::Attribute.max_class()).filter(|&a| eligible(a)).map(Some).collect(),
            Granularity::PerInstance => vec![None],
        };
        for a in attributes {
            for k in 1..=task.max_class() {
                let pixels: Vec<bool> = (0..inst.mask.len())
                    .map(|i| {
                        let attr = view.attribute[i];
                        let attr_ok = match a {
                            Some(a) => attr == a,
                            None => eligible(attr),
                        };
                        inst.mask[i] && attr_ok && chars[i] == k
                    })
                    .collect();
                if count(&pixels) > 0 {
                    out.push(Unit {
                        image,
                        class: k,
                        pixels,
                        score: inst.score,
                    });
                }
            }
        }
    }
}

/// AP at one threshold from an explicit ranked table. `iou[p][g]` is `None`
/// for pairs in different images.
fn ranked_ap(scores: &[f64], iou: &[Vec<Option<f64>>], n_gt: usize, threshold: f64) -> f64 {
    // stable sort by descending score keeps ingest order on ties
    let mut ranking: Vec<usize> = (0..scores.len()).collect();
    ranking.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());
    let mut consumed = vec![false; n_gt];
    let mut is_tp = Vec::new();
    for &p in &ranking {
        let mut best: Option<usize> = None;
        for g in 0..n_gt {
            if consumed[g] {
                continue;
            }
            if let Some(v) = iou[p][g] {
                match best {
                    Some(b) if iou[p][b].unwrap() >= v => {}
                    _ => best = Some(g),
                }
            }
        }
        match best {
            Some(g) if iou[p][g].unwrap() >= threshold => {
                consumed[g] = true;
                is_tp.push(true);
            }
            _ => is_tp.push(false),
        }
    }
    let mut precision = Vec::new();
    let mut tp = 0usize;
    for (rank, &hit) in is_tp.iter().enumerate() {
        if hit {
            tp += 1;
        }
        precision.push(tp as f64 / (rank + 1) as f64);
    }
    let mut area = 0.0;
    for i in 0..precision.len() {
        if !is_tp[i] {
            continue;
        }
        let mut envelope = precision[i];
        for &later in &precision[i..] {
            if later > envelope {
                envelope = later;
            }
        }
        area += envelope;
    }
    area / n_gt as f64
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut s = 0.0;
    for v in values {
        s += v;
    }
    Some(s / values.len() as f64)
}

fn curve(gts: &[&Unit], preds: &[&Unit], thresholds: &[f64], pair: impl Fn(usize, usize) -> f64) -> Option<ClassAp> {
    if gts.is_empty() {
        return None;
    }
    let iou: Vec<Vec<Option<f64>>> = preds
        .iter()
        .enumerate()
        .map(|(p, pu)| {
            gts.iter()
                .enumerate()
                .map(|(g, gu)| (pu.image == gu.image).then(|| pair(p, g)))
                .collect()
        })
        .collect();
    let scores: Vec<f64> = preds.iter().map(|p| p.score).collect();
    let per_threshold: Vec<f64> = thresholds.iter().map(|&t| ranked_ap(&scores, &iou, gts.len(), t)).collect();
    let volume = mean(&per_threshold).unwrap();
    Some(ClassAp { per_threshold, volume })
}

fn class_table(
    metric: ApMetric,
    task: Task,
    gts: &[Unit],
    preds: &[Unit],
    taxonomy: &Taxonomy,
    config: &ApConfig,
) -> ApReport {
    let catalog = taxonomy.catalog(task);
    let thresholds = config.thresholds.as_slice();
    let mut per_class = OrderedMap::default();
    let mut volumes = Vec::new();
    for c in 1..=catalog.class_count() as u16 {
        let g: Vec<&Unit> = gts.iter().filter(|u| u.class == c).collect();
        let p: Vec<&Unit> = preds.iter().filter(|u| u.class == c).collect();
        let entry = curve(&g, &p, thresholds, |i, j| pixel_iou(&p[i].pixels, &g[j].pixels));
        if let Some(e) = &entry {
            volumes.push(e.volume);
        }
        per_class.push(catalog.name(c).to_owned(), entry);
    }
    ApReport {
        metric,
        task: Some(task),
        thresholds: thresholds.to_vec(),
        per_class,
        overall: mean(&volumes),
        config: config.clone(),
    }
}

fn person_score(p: &Person, g: &Person) -> f64 {
    let mut classes = Vec::new();
    for c in 1..=Task::Attribute.max_class() {
        if p.parts.contains(&c) || g.parts.contains(&c) {
            classes.push(c);
        }
    }
    if classes.is_empty() {
        return pixel_iou(&p.mask, &g.mask);
    }
    let mut sum = 0.0;
    for &c in &classes {
        let a: Vec<bool> = p.parts.iter().map(|&v| v == c).collect();
        let b: Vec<bool> = g.parts.iter().map(|&v| v == c).collect();
        sum += pixel_iou(&a, &b);
    }
    sum / classes.len() as f64
}

fn persons(view: &View, image: usize, out: &mut Vec<Person>) -> u64 {
    let mut discarded = 0;
    for inst in &view.instances {
        if count(&inst.mask) == 0 {
            discarded += 1;
            continue;
        }
        out.push(Person {
            image,
            mask: inst.mask.clone(),
            parts: (0..inst.mask.len()).map(|i| if inst.mask[i] { view.attribute[i] } else { 0 }).collect(),
            score: inst.score,
        });
    }
    discarded
}

fn semantic(task: Task, pairs: &[(&[u16], &[u16])], taxonomy: &Taxonomy) -> SemanticReport {
    let n = task.max_class() as usize + 1;
    let catalog = taxonomy.catalog(task);
    let mut per_class = OrderedMap::default();
    let mut per_class_dice = OrderedMap::default();
    let mut fg = Vec::new();
    let mut all = Vec::new();
    for c in 0..n as u16 {
        let (mut tp, mut fp, mut fnn) = (0u64, 0u64, 0u64);
        for (gt, pred) in pairs {
            for i in 0..gt.len() {
                match (gt[i] == c, pred[i] == c) {
                    (true, true) => tp += 1,
                    (false, true) => fp += 1,
                    (true, false) => fnn += 1,
                    _ => {}
                }
            }
        }
        let iou = (tp + fp + fnn > 0).then(|| tp as f64 / (tp + fp + fnn) as f64);
        let dice = (2 * tp + fp + fnn > 0).then(|| (2 * tp) as f64 / (2 * tp + fp + fnn) as f64);
        if let Some(v) = iou {
            all.push(v);
            if c > 0 {
                fg.push(v);
            }
        }
        per_class.push(catalog.name(c).to_owned(), iou);
        per_class_dice.push(catalog.name(c).to_owned(), dice);
    }
    SemanticReport {
        task,
        per_class,
        mean_foreground: mean(&fg),
        mean_with_background: mean(&all),
        per_class_dice,
    }
}

/// Reference implementation of the full evaluation. Accepts the same inputs
/// and configuration as [`crate::evaluate::evaluate`] and returns the same
/// report shape, tagged with the `naive` engine.
pub fn naive_eval(
    gt: &[ImageSample],
    preds: &[Option<PredictionSample>],
    taxonomy: &Taxonomy,
    config: &EvalConfig,
) -> Result<EvalReport> {
    config.validate()?;
    if gt.len() != preds.len() {
        return Err(Error::InvalidConfig("ground truth and predictions differ in length".into()));
    }
    let mut empties = Vec::new();
    let mut missing = Vec::new();
    for (g, p) in gt.iter().zip(preds) {
        for m in g.maps() {
            g.attribute.ensure_same_dims(m)?;
        }
        match p {
            Some(p) if (p.width, p.height) != g.dims() => {
                return Err(Error::DimensionMismatch {
                    expected: g.dims(),
                    found: (p.width, p.height),
                })
            }
            Some(_) => empties.push(None),
            None => {
                if config.require_complete {
                    return Err(Error::MissingPrediction(g.image_id.clone()));
                }
                missing.push(g.image_id.clone());
                let (w, h) = g.dims();
                empties.push(Some(PredictionSample::empty(&g.image_id, w, h)?));
            }
        }
    }
    let gts: Vec<View> = gt.iter().map(gt_view).collect();
    let pvs: Vec<View> = preds
        .iter()
        .zip(&empties)
        .map(|(p, e)| pred_view(p.as_ref().or(e.as_ref()).unwrap()))
        .collect::<Result<_>>()?;

    let mut semantic_reports = Vec::new();
    for task in config.semantic_tasks() {
        let pairs: Vec<(&[u16], &[u16])> = gts.iter().zip(&pvs).map(|(g, p)| (g.map(task), p.map(task))).collect();
        semantic_reports.push(semantic(task, &pairs, taxonomy));
    }

    let thresholds = &config.thresholds;
    let mut ap = Vec::new();
    if config.wants_region() {
        let (mut g, mut p) = (Vec::new(), Vec::new());
        for i in 0..gts.len() {
            region_units(&gts[i], i, &mut g);
            region_units(&pvs[i], i, &mut p);
        }
        ap.push(class_table(ApMetric::ApR, Task::Attribute, &g, &p, taxonomy, &ApConfig::new(thresholds, None)));
    }
    let mut discarded = 0;
    if config.wants_person() {
        let (mut g, mut p) = (Vec::new(), Vec::new());
        for i in 0..gts.len() {
            persons(&gts[i], i, &mut g);
            discarded += persons(&pvs[i], i, &mut p);
        }
        let as_units = |v: &[Person]| -> Vec<Unit> {
            v.iter()
                .map(|x| Unit {
                    image: x.image,
                    class: 1,
                    pixels: Vec::new(),
                    score: x.score,
                })
                .collect()
        };
        let (gu, pu) = (as_units(&g), as_units(&p));
        let gr: Vec<&Unit> = gu.iter().collect();
        let pr: Vec<&Unit> = pu.iter().collect();
        let entry = curve(&gr, &pr, thresholds.as_slice(), |i, j| person_score(&p[i], &g[j]));
        let overall = entry.as_ref().map(|e| e.volume);
        let mut per_class = OrderedMap::default();
        per_class.push(crate::instance_metrics::PERSON_CLASS.to_owned(), entry);
        ap.push(ApReport {
            metric: ApMetric::ApP,
            task: None,
            thresholds: thresholds.as_slice().to_vec(),
            per_class,
            overall,
            config: ApConfig::new(thresholds, None),
        });
    }
    let characterizable = taxonomy.characterizable_table();
    for task in config.characteristic_tasks() {
        let (mut g, mut p) = (Vec::new(), Vec::new());
        for i in 0..gts.len() {
            characterized_units(&gts[i], i, task, characterizable, config.unit_granularity, &mut g);
            characterized_units(&pvs[i], i, task, characterizable, config.unit_granularity, &mut p);
        }
        let cfg = ApConfig::new(thresholds, Some(config.unit_granularity));
        ap.push(class_table(ApMetric::ApCr, task, &g, &p, taxonomy, &cfg));
    }

    Ok(EvalReport::new(config, Engine::Naive, gt.len(), missing, discarded, semantic_reports, ap))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Three predictions ranked TP, FP, TP against two ground truths.
    #[test]
    fn hand_trace_table() {
        let iou = vec![vec![Some(0.7), Some(0.0)], vec![Some(0.6), Some(0.0)], vec![Some(0.0), Some(0.55)]];
        let scores = [0.9, 0.8, 0.7];
        let ap = ranked_ap(&scores, &iou, 2, 0.5);
        assert!((ap - (0.5 + 0.5 * 2.0 / 3.0)).abs() < 1e-12);
        assert!((ranked_ap(&scores, &iou, 2, 0.65) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fp_before_tp() {
        let iou = vec![vec![Some(0.0)], vec![Some(1.0)]];
        assert_eq!(ranked_ap(&[0.9, 0.8], &iou, 1, 0.5), 0.5);
    }

    #[test]
    fn ties_keep_ingest_order() {
        // equal scores: the first listed prediction claims the ground truth
        let iou = vec![vec![Some(0.6)], vec![Some(0.9)]];
        assert_eq!(ranked_ap(&[1.0, 1.0], &iou, 1, 0.5), 1.0);
        assert_eq!(ranked_ap(&[1.0, 1.0], &iou, 1, 0.7), 0.5);
    }
}
