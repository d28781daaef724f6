//! Runs the main engine and the naive reference engine on perturbed scenes
//! and reports the largest disagreement.

use hparse_eval::evaluate::{evaluate, Engine, EvalConfig};
use hparse_eval::synth::{generate_scene, perturb, PerturbationSpec, SceneSpec};
use hparse_eval::taxonomy::Taxonomy;

fn main() -> hparse_eval::Result<()> {
    let tax = Taxonomy::default();
    let mut gt = Vec::new();
    let mut preds = Vec::new();
    for seed in 0..50 {
        let scene = generate_scene(seed, &SceneSpec::default(), &tax)?;
        gt.push(scene.ground_truth);
        preds.push(Some(perturb(&scene.prediction, &PerturbationSpec::random(seed))?.0));
    }
    let main = evaluate(&gt, &preds, &tax, &EvalConfig::default())?;
    let naive = evaluate(&gt, &preds, &tax, &EvalConfig { engine: Engine::Naive, ..Default::default() })?;

    let mut worst = 0.0f64;
    let mut count = 0;
    for (a, b) in main.ap.iter().zip(&naive.ap) {
        for ((_, x), (_, y)) in a.per_class.iter().zip(b.per_class.iter()) {
            if let (Some(x), Some(y)) = (x, y) {
                for (u, v) in x.per_threshold.iter().zip(&y.per_threshold) {
                    worst = worst.max((u - v).abs());
                    count += 1;
                }
            }
        }
    }
    println!("{count} AP values compared, max difference {worst:e}");
    Ok(())
}
