//! AP^r on a synthetic scene whose predictions have been eroded and rescored.

use hparse_eval::instance_metrics::{ap_r_vol, extract_region_units, region_units_from_instances, Thresholds};
use hparse_eval::synth::{generate_scene, perturb, PerturbationSpec, SceneSpec};
use hparse_eval::taxonomy::Taxonomy;

fn main() -> hparse_eval::Result<()> {
    let tax = Taxonomy::default();
    let scene = generate_scene(3, &SceneSpec::default().with_persons(3, 3), &tax)?;
    let noise = PerturbationSpec {
        mask_erosion: 2,
        score_noise: 0.4,
        drop_instance_prob: 0.0,
        relabel_prob: Default::default(),
        seed: 11,
    };
    let (pred, _) = perturb(&scene.prediction, &noise)?;

    let gt = &scene.ground_truth;
    let gt_units = extract_region_units(&gt.instance, &gt.attribute, &gt.image_id, None)?;
    let pred_units = region_units_from_instances(&pred.instances, &pred.attribute, &pred.image_id)?;
    println!("{} ground-truth units, {} predicted", gt_units.len(), pred_units.len());

    let report = ap_r_vol(&gt_units, &pred_units, &Thresholds::default(), &tax)?;
    for (class, ap) in report.per_class.iter() {
        if let Some(ap) = ap {
            println!("{class:<14} AP^r_vol {:.3}  AP@0.5 {:.3}", ap.volume, ap.per_threshold[0]);
        }
    }
    println!("overall {:.3}", report.overall.unwrap_or(f64::NAN));
    Ok(())
}
