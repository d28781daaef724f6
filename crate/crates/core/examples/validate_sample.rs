//! Corrupts a clean sample and shows what the validator reports.

use hparse_eval::dataset_tools::validate::{validate_sample, ValidateOptions};
use hparse_eval::maskcore::Task;
use hparse_eval::synth::{generate_scene, SceneSpec};
use hparse_eval::taxonomy::Taxonomy;

fn main() -> hparse_eval::Result<()> {
    let tax = Taxonomy::default();
    let mut sample = generate_scene(4, &SceneSpec::default().with_persons(2, 2), &tax)?.ground_truth;
    println!("clean: {}", validate_sample(&sample, &tax, &ValidateOptions::default()).is_clean());

    let face = tax.catalog(Task::Attribute).index_of("Face").unwrap();
    // a 4x4 patch of face pixels carrying a size label
    for y in 0..4 {
        for x in 0..4 {
            sample.attribute.set(x, y, face);
            sample.size.set(x, y, 2);
            sample.instance.set(x, y, 1);
        }
    }

    for strict in [false, true] {
        let report = validate_sample(&sample, &tax, &ValidateOptions { strict, ..Default::default() });
        println!("strict={strict}");
        for v in &report.violations {
            println!("  {} {:?} {} px: {}", v.code, v.severity, v.pixel_count, v.detail);
        }
    }
    Ok(())
}
