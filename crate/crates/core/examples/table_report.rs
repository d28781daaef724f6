//! Evaluates synthetic predictions and prints the Markdown report.

use hparse_eval::dataset_tools::report::{emit_report, parse_table, ReportFormat};
use hparse_eval::evaluate::{evaluate, EvalConfig};
use hparse_eval::semantic_metrics::MeanPolicy;
use hparse_eval::synth::{generate_scene, perturb, PerturbationSpec, SceneSpec};
use hparse_eval::taxonomy::Taxonomy;

fn main() -> hparse_eval::Result<()> {
    let tax = Taxonomy::default();
    let mut gt = Vec::new();
    let mut preds = Vec::new();
    for seed in 0..30 {
        let scene = generate_scene(seed, &SceneSpec::default(), &tax)?;
        gt.push(scene.ground_truth);
        preds.push(Some(perturb(&scene.prediction, &PerturbationSpec::random(seed))?.0));
    }
    let report = evaluate(&gt, &preds, &tax, &EvalConfig::default())?;
    let text = emit_report(&report.bundle(), ReportFormat::Table, &tax, MeanPolicy::ForegroundOnly);
    print!("{text}");

    let blocks = parse_table(&text)?;
    if let Some(v) = blocks[0].value("mIoU", "all") {
        println!("\nattribute mIoU read back from the table: {v}");
    }
    Ok(())
}
