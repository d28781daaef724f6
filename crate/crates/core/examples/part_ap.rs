//! AP^p: persons matched by the mean IoU of their parts.

use hparse_eval::instance_metrics::{ap_p_vol, instances_from_map, person_match_score, PersonUnit, Thresholds};
use hparse_eval::synth::{generate_scene, perturb, PerturbationSpec, SceneSpec};
use hparse_eval::taxonomy::Taxonomy;

fn main() -> hparse_eval::Result<()> {
    let tax = Taxonomy::default();
    let mut gt_persons = Vec::new();
    let mut pred_persons = Vec::new();
    for seed in 0..8 {
        let scene = generate_scene(seed, &SceneSpec::default().with_persons(1, 4), &tax)?;
        let (pred, _) = perturb(&scene.prediction, &PerturbationSpec::random(seed))?;
        let gt = &scene.ground_truth;
        for (i, inst) in instances_from_map(&gt.instance, None)?.iter().enumerate() {
            gt_persons.push(PersonUnit::from_maps(&gt.image_id, inst, &gt.attribute, i as u64)?);
        }
        for (i, inst) in pred.instances.iter().enumerate() {
            pred_persons.push(PersonUnit::from_maps(&pred.image_id, inst, &pred.attribute, i as u64)?);
        }
    }

    if let (Some(p), Some(g)) = (pred_persons.first(), gt_persons.first()) {
        println!("first pair: {} vs {} parts, score {:.3}", p.parts.len(), g.parts.len(), person_match_score(p, g)?);
    }
    let report = ap_p_vol(&gt_persons, &pred_persons, &Thresholds::default())?;
    println!("{} ground-truth persons, {} predicted", gt_persons.len(), pred_persons.len());
    println!("AP^p_vol {:.4}", report.overall.unwrap_or(f64::NAN));
    Ok(())
}
