//! Per-class IoU, Dice and both mIoU policies for a small color map.

use hparse_eval::maskcore::{LabelMap, Task};
use hparse_eval::semantic_metrics::{accumulate, dice_per_class, mean_iou, MeanPolicy};
use hparse_eval::taxonomy::Taxonomy;

fn main() -> hparse_eval::Result<()> {
    let tax = Taxonomy::default();
    let gt = LabelMap::new(4, 2, Task::Color, vec![0, 1, 1, 2, 0, 1, 2, 2])?;
    let pred = LabelMap::new(4, 2, Task::Color, vec![0, 1, 2, 2, 1, 1, 2, 0])?;
    let cm = accumulate(&gt, &pred, Task::Color.max_class() as usize + 1)?;

    let fg = mean_iou(&cm, MeanPolicy::ForegroundOnly)?;
    let all = mean_iou(&cm, MeanPolicy::WithBackground)?;
    for (c, (iou, dice)) in fg.per_class.iter().zip(dice_per_class(&cm)).enumerate() {
        if let (Some(iou), Some(dice)) = (iou, dice) {
            println!("{:<12} IoU {iou:.3}  Dice {dice:.3}", tax.class_name(Task::Color, c as u16));
        }
    }
    println!("mIoU foreground only: {:.4}", fg.mean);
    println!("mIoU with background: {:.4}", all.mean);
    Ok(())
}
