//! Writes a small synthetic dataset to a temporary directory and scans it.

use hparse_eval::dataset_tools::manifest::DatasetManifest;
use hparse_eval::dataset_tools::stats::scan_stats;
use hparse_eval::synth::{write_fixture, SceneSpec};
use hparse_eval::taxonomy::Taxonomy;

fn main() -> hparse_eval::Result<()> {
    let tax = Taxonomy::default();
    let dir = std::env::temp_dir().join("hparse-eval-dataset-stats");
    let fixture = write_fixture(&dir, 0..20, &SceneSpec::default(), None, &tax)?;
    let manifest = DatasetManifest::load(&fixture.manifest_path)?;
    let report = scan_stats(&manifest, &tax);

    println!("{} images, {} people", report.images, report.instances_total);
    for (split, n) in report.images_per_split.iter() {
        println!("  {split}: {n}");
    }
    for (label, n) in report.images_per_label.get("size").into_iter().flat_map(|m| m.iter()) {
        println!("  size {label}: {n} images");
    }
    std::fs::remove_dir_all(&dir).ok();
    Ok(())
}
