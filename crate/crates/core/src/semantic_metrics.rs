//! Pixel-wise segmentation metrics over confusion matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maskcore::{LabelMap, Task};
use crate::ordered::OrderedMap;
use crate::taxonomy::Taxonomy;

/// Which classes enter the mean IoU.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanPolicy {
    ForegroundOnly,
    WithBackground,
}

impl std::str::FromStr for MeanPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "foreground_only" => Ok(Self::ForegroundOnly),
            "with_background" => Ok(Self::WithBackground),
            other => Err(Error::InvalidConfig(format!("unknown mean policy `{other}`"))),
        }
    }
}

/// `counts[g * n + p]` = pixels with ground truth `g` predicted as `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    task: Task,
    n: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn zeros(task: Task, n: usize) -> Self {
        Self {
            task,
            n,
            counts: vec![0; n * n],
        }
    }

    /// Zero matrix sized for the task's catalog plus background.
    pub fn for_task(task: Task) -> Self {
        Self::zeros(task, task.max_class() as usize + 1)
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, gt: usize, pred: usize) -> u64 {
        self.counts[gt * self.n + pred]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn true_positives(&self, c: usize) -> u64 {
        self.get(c, c)
    }

    pub fn false_positives(&self, c: usize) -> u64 {
        (0..self.n).map(|g| self.get(g, c)).sum::<u64>() - self.get(c, c)
    }

    pub fn false_negatives(&self, c: usize) -> u64 {
        self.counts[c * self.n..(c + 1) * self.n].iter().sum::<u64>() - self.get(c, c)
    }

    /// Adds one image's pixels.
    pub fn add(&mut self, gt: &LabelMap, pred: &LabelMap) -> Result<()> {
        gt.ensure_same_dims(pred)?;
        if gt.task() != pred.task() || gt.task() != self.task {
            return Err(Error::ShapeMismatch(format!(
                "tasks {} / {} fed to a {} matrix",
                gt.task(),
                pred.task(),
                self.task
            )));
        }
        let n = self.n;
        let out_of_range = |v: u16| Error::ClassOutOfRange {
            task: self.task,
            class: v as u32,
            max: n as u32 - 1,
        };
        for (&g, &p) in gt.data().iter().zip(pred.data()) {
            let (g, p) = (g as usize, p as usize);
            if g >= n {
                return Err(out_of_range(g as u16));
            }
            if p >= n {
                return Err(out_of_range(p as u16));
            }
            self.counts[g * n + p] += 1;
        }
        Ok(())
    }

    pub fn merge_from(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if self.task != other.task || self.n != other.n {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} {} vs {}x{} {}",
                self.n, self.n, self.task, other.n, other.n, other.task
            )));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        Ok(())
    }
}

pub fn accumulate(gt: &LabelMap, pred: &LabelMap, n: usize) -> Result<ConfusionMatrix> {
    let mut cm = ConfusionMatrix::zeros(gt.task(), n);
    cm.add(gt, pred)?;
    Ok(cm)
}

pub fn merge(a: &ConfusionMatrix, b: &ConfusionMatrix) -> Result<ConfusionMatrix> {
    let mut out = a.clone();
    out.merge_from(b)?;
    Ok(out)
}

/// TP / (TP + FP + FN) per class; `None` where the union is empty.
pub fn iou_per_class(cm: &ConfusionMatrix) -> Vec<Option<f64>> {
    (0..cm.n())
        .map(|c| {
            let tp = cm.true_positives(c);
            let union = tp + cm.false_positives(c) + cm.false_negatives(c);
            (union > 0).then(|| tp as f64 / union as f64)
        })
        .collect()
}

/// 2TP / (2TP + FP + FN) per class; `None` where the denominator is zero.
pub fn dice_per_class(cm: &ConfusionMatrix) -> Vec<Option<f64>> {
    (0..cm.n())
        .map(|c| {
            let tp = cm.true_positives(c);
            let denom = 2 * tp + cm.false_positives(c) + cm.false_negatives(c);
            (denom > 0).then(|| (2 * tp) as f64 / denom as f64)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanIou {
    pub mean: f64,
    pub per_class: Vec<Option<f64>>,
}

/// Mean of the defined per-class IoUs over the policy's class set.
pub fn mean_of_defined(per_class: &[Option<f64>], policy: MeanPolicy) -> Option<f64> {
    let skip = match policy {
        MeanPolicy::ForegroundOnly => 1,
        MeanPolicy::WithBackground => 0,
    };
    let defined: Vec<f64> = per_class.iter().skip(skip).flatten().copied().collect();
    if defined.is_empty() {
        return None;
    }
    Some(defined.iter().sum::<f64>() / defined.len() as f64)
}

pub fn mean_iou(cm: &ConfusionMatrix, policy: MeanPolicy) -> Result<MeanIou> {
    let per_class = iou_per_class(cm);
    let mean = mean_of_defined(&per_class, policy).ok_or(Error::AllUndefined)?;
    Ok(MeanIou { mean, per_class })
}

/// One task's mIoU entry as it appears in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticReport {
    pub task: Task,
    pub per_class: OrderedMap<Option<f64>>,
    pub mean_foreground: Option<f64>,
    pub mean_with_background: Option<f64>,
    pub per_class_dice: OrderedMap<Option<f64>>,
}

impl SemanticReport {
    /// Builds the report entry; `per_class` includes `background` first.
    pub fn from_ious(
        task: Task,
        iou: &[Option<f64>],
        dice: &[Option<f64>],
        taxonomy: &Taxonomy,
    ) -> Self {
        let catalog = taxonomy.catalog(task);
        let named = |values: &[Option<f64>]| {
            values
                .iter()
                .enumerate()
                .map(|(c, v)| (catalog.name(c as u16).to_owned(), *v))
                .collect()
        };
        Self {
            task,
            per_class: named(iou),
            mean_foreground: mean_of_defined(iou, MeanPolicy::ForegroundOnly),
            mean_with_background: mean_of_defined(iou, MeanPolicy::WithBackground),
            per_class_dice: named(dice),
        }
    }

    pub fn from_confusion(cm: &ConfusionMatrix, taxonomy: &Taxonomy) -> Self {
        Self::from_ious(cm.task(), &iou_per_class(cm), &dice_per_class(cm), taxonomy)
    }

    pub fn mean(&self, policy: MeanPolicy) -> Option<f64> {
        match policy {
            MeanPolicy::ForegroundOnly => self.mean_foreground,
            MeanPolicy::WithBackground => self.mean_with_background,
        }
    }
}
