//! AP^cr for size: the attribute a region was predicted as does not matter,
//! only its characteristic.

use hparse_eval::instance_metrics::{ap_cr_vol, extract_characterized_units, Granularity, Thresholds};
use hparse_eval::maskcore::Task;
use hparse_eval::synth::{generate_scene, SceneSpec};
use hparse_eval::taxonomy::Taxonomy;

fn main() -> hparse_eval::Result<()> {
    let tax = Taxonomy::default();
    let scene = generate_scene(21, &SceneSpec::default().with_persons(3, 3).with_parts(4, 6), &tax)?;
    let gt = &scene.ground_truth;
    let mut pred = scene.prediction.clone();

    // move every characterizable attribute to the next one, keeping the size map
    let ids: Vec<u16> = tax.characterizable_ids().collect();
    for v in pred.attribute.data_mut() {
        if let Some(i) = ids.iter().position(|id| id == v) {
            *v = ids[(i + 1) % ids.len()];
        }
    }
    let scores: Vec<f64> = pred.instances.iter().map(|i| i.score.unwrap_or(1.0)).collect();
    let pred_instance_map = gt.instance.clone();

    for granularity in [Granularity::PerAttributeRegion, Granularity::PerInstance] {
        let units = |inst, attr, size, s| {
            extract_characterized_units(inst, attr, size, &tax, Task::Size, &gt.image_id, s, granularity)
        };
        let g = units(&gt.instance, &gt.attribute, &gt.size, None)?;
        let p = units(&pred_instance_map, &pred.attribute, &pred.size, Some(&scores))?;
        let report = ap_cr_vol(&g, &p, &Thresholds::default(), &tax, Task::Size, granularity)?;
        println!("{granularity:?}: {} units", g.len());
        for (class, ap) in report.per_class.iter() {
            match ap {
                Some(ap) => println!("  {class:<12} {:.3}", ap.volume),
                None => println!("  {class:<12} -"),
            }
        }
    }
    Ok(())
}
