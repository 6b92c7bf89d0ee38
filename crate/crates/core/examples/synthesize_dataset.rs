// Runs the whole pipeline on a generated dataset: images and annotations
// are written to disk, loaded back, and synthesized into an output folder.
// Pass a directory to keep everything.

use std::path::{Path, PathBuf};

use posepaste::ingest::{load_donor_dataset, load_person_dataset, LoadOptions};
use posepaste::pipeline::{stats, synthesize, SynthesisConfig};
use posepaste::synthetic::{self, KEYPOINTS_FILE};

pub fn run_example(root: &Path) -> posepaste::Result<Vec<String>> {
    let persons_dir = root.join("persons");
    let donors_dir = root.join("donors");
    synthetic::write_persons(&persons_dir, &synthetic::persons(8, 4, 64, 128, 1)?)?;
    synthetic::write_donors(&donors_dir, &synthetic::donors(3, 96, 1)?)?;

    let opts = LoadOptions::default();
    let persons = load_person_dataset(&persons_dir, persons_dir.join(KEYPOINTS_FILE), opts)?;
    let donors = load_donor_dataset(&donors_dir, donors_dir.join(KEYPOINTS_FILE), None, opts)?;

    let cfg = SynthesisConfig::new(root.join("out"), 2024);
    let manifest = synthesize(&persons.records, &donors.records, &cfg)?;
    let mut lines = vec![format!(
        "{} persons, {} donors -> {} composites, {} skips",
        persons.records.len(),
        donors.records.len(),
        manifest.fakes().count(),
        manifest.skips().count()
    )];
    lines.extend(stats(&manifest).to_text().lines().map(str::to_owned));
    Ok(lines)
}

fn main() -> posepaste::Result<()> {
    let keep = std::env::args_os().nth(1).map(PathBuf::from);
    let scratch = tempfile::tempdir().map_err(|e| posepaste::Error::Config(e.to_string()))?;
    let root = keep.unwrap_or_else(|| scratch.path().to_path_buf());
    for line in run_example(&root)? {
        println!("{line}");
    }
    Ok(())
}
