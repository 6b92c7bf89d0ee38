//! Whole-dataset synthesis: describe every pose, match a donor to each
//! pedestrian, correct the donor's pose, composite, and write the images,
//! manifest and statistics under one output directory.
//!
//! ```text
//! <out>/images/<stem>_fake.<ext>   composites
//! <out>/images/<file>              originals (unless disabled)
//! <out>/manifest.tsv               written last, atomically
//! <out>/stats.txt, stats.json
//! ```

mod manifest;
mod stats;

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::compositor::compose_fake;
use crate::error::{Error, Result};
use crate::geometry::similarity_from_match;
use crate::ingest::{DonorRecord, PersonRecord, PoseKeypoints};
use crate::matcher::{match_one, pedestrian_rng};
use crate::pose::{describe, Bins, PoseDescriptor, DEFAULT_BIN};

pub use manifest::{ManifestHeader, ManifestRow, SynthesisManifest, COLUMNS, MANIFEST_FILE};
pub use stats::{stats, Bucket, StatsReport};

pub const IMAGES_DIR: &str = "images";
pub const STATS_TEXT_FILE: &str = "stats.txt";
pub const STATS_JSON_FILE: &str = "stats.json";
pub const FAKE_SUFFIX: &str = "_fake";

#[derive(Clone, Debug)]
pub struct SynthesisConfig {
    pub bins: Bins,
    pub seed: u64,
    pub scale_correct: bool,
    pub include_originals: bool,
    pub output_dir: PathBuf,
    pub strict: bool,
    /// Worker threads; 0 uses every core. Results do not depend on it.
    pub jobs: usize,
}

impl SynthesisConfig {
    pub fn new(output_dir: impl Into<PathBuf>, seed: u64) -> Self {
        SynthesisConfig {
            bins: Bins::uniform(DEFAULT_BIN),
            seed,
            scale_correct: true,
            include_originals: true,
            output_dir: output_dir.into(),
            strict: false,
            jobs: 0,
        }
    }
}

/// `0002_c1s1_000451_03.jpg` → `0002_c1s1_000451_03_fake.jpg`.
pub fn fake_name(file_name: &str) -> String {
    match file_name.rsplit_once('.') {
        Some((stem, ext)) if !stem.is_empty() => format!("{stem}{FAKE_SUFFIX}.{ext}"),
        _ => format!("{file_name}{FAKE_SUFFIX}.png"),
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn hash_keypoints(h: &mut Sha256, kp: &PoseKeypoints) {
    for p in [kp.left_shoulder, kp.right_shoulder, kp.left_hip, kp.right_hip, kp.neck] {
        h.update(p.x.to_le_bytes());
        h.update(p.y.to_le_bytes());
    }
    for c in kp.confidences {
        h.update(c.to_le_bytes());
    }
}

fn hash_str(h: &mut Sha256, s: &str) {
    h.update((s.len() as u64).to_le_bytes());
    h.update(s.as_bytes());
}

/// Digest of everything about the pedestrians that can affect the output.
pub fn persons_digest(persons: &[PersonRecord]) -> String {
    let mut h = Sha256::new();
    for p in persons {
        hash_str(&mut h, &p.file_name());
        h.update(p.identity.to_le_bytes());
        h.update(p.camera.to_le_bytes());
        h.update(p.image.width().to_le_bytes());
        h.update(p.image.height().to_le_bytes());
        h.update(p.image.as_raw());
        hash_keypoints(&mut h, &p.keypoints);
    }
    hex::encode(h.finalize())
}

pub fn donors_digest(donors: &[DonorRecord]) -> String {
    let mut h = Sha256::new();
    for d in donors {
        hash_str(&mut h, &d.file_name());
        h.update(d.image.width().to_le_bytes());
        h.update(d.image.height().to_le_bytes());
        h.update(d.image.as_raw());
        h.update(d.mask.to_gray().as_raw());
        hash_keypoints(&mut h, &d.keypoints);
    }
    hex::encode(h.finalize())
}

fn check_writable(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir.join(IMAGES_DIR)).map_err(|e| Error::io(dir, e))?;
    let probe = dir.join(".posepaste-probe");
    fs::write(&probe, b"").map_err(|e| Error::io(&probe, e))?;
    fs::remove_file(&probe).map_err(|e| Error::io(&probe, e))
}

fn extension(name: &str) -> &str {
    name.rsplit_once('.').map(|(_, e)| e).unwrap_or("png")
}

struct Worker<'a> {
    cfg: &'a SynthesisConfig,
    donors: &'a [DonorRecord],
    /// Descriptors of usable donors, paired with their index in `donors`.
    donor_descs: Vec<PoseDescriptor>,
    donor_ids: Vec<usize>,
}

impl Worker<'_> {
    fn row_for(&self, index: usize, p: &PersonRecord) -> Result<ManifestRow> {
        let mut row = ManifestRow {
            pedestrian_path: p.file_name(),
            identity: p.identity,
            camera: p.camera,
            ..Default::default()
        };
        let desc = match describe(&p.keypoints, self.cfg.bins) {
            Ok(d) => d,
            Err(e) => return self.skip(row, e),
        };
        row.orientation = Some(desc.orientation);

        let m = match_one(index, &desc, &self.donor_descs, &mut pedestrian_rng(self.cfg.seed, index))?;
        let donor = &self.donors[self.donor_ids[m.donor_index]];
        let similarity = similarity_from_match(&desc, &self.donor_descs[m.donor_index], self.cfg.scale_correct)?;
        row.donor_path = Some(donor.file_name());
        row.transform = Some(similarity);
        row.slope_residual_q = Some(m.slope_residual_q);
        row.height_residual_q = Some(m.height_residual_q);
        row.relaxation_level = Some(m.relaxation_level);

        let composite = match compose_fake(p, donor, &similarity.to_affine()) {
            Ok(c) => c,
            Err(e) => return self.skip(row, e),
        };
        if let Some(reason) = composite.meta.skipped {
            if self.cfg.strict {
                return Err(Error::Config(format!("{}: {reason}", row.pedestrian_path)));
            }
            row.skip_reason = Some(reason);
            return Ok(row);
        }

        let name = fake_name(&row.pedestrian_path);
        let bytes = composite.image.encode(extension(&name))?;
        let rel = format!("{IMAGES_DIR}/{name}");
        let path = self.cfg.output_dir.join(&rel);
        fs::write(&path, &bytes).map_err(|e| Error::io(&path, e))?;
        row.pasted_pixels = composite.meta.pasted_pixels;
        row.output_sha256 = Some(sha256_hex(&bytes));
        row.output_path = Some(rel);
        Ok(row)
    }

    fn skip(&self, mut row: ManifestRow, err: Error) -> Result<ManifestRow> {
        if self.cfg.strict {
            return Err(err);
        }
        log::warn!("skipping {}: {err}", row.pedestrian_path);
        row.skip_reason = Some(err.to_string());
        Ok(row)
    }

    fn copy_original(&self, p: &PersonRecord) -> Result<()> {
        let name = p.file_name();
        let dest = self.cfg.output_dir.join(IMAGES_DIR).join(&name);
        if p.source_path.is_file() {
            fs::copy(&p.source_path, &dest).map_err(|e| Error::io(&dest, e))?;
        } else {
            fs::write(&dest, p.image.encode(extension(&name))?).map_err(|e| Error::io(&dest, e))?;
        }
        Ok(())
    }
}

/// Runs the full synthesis and returns the manifest that was written.
pub fn synthesize(persons: &[PersonRecord], donors: &[DonorRecord], cfg: &SynthesisConfig) -> Result<SynthesisManifest> {
    cfg.bins.validate()?;
    if donors.is_empty() {
        return Err(Error::Config("donor set is empty".into()));
    }
    check_writable(&cfg.output_dir)?;
    let manifest_path = cfg.output_dir.join(MANIFEST_FILE);
    if manifest_path.exists() {
        fs::remove_file(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    }

    let mut donor_descs = Vec::with_capacity(donors.len());
    let mut donor_ids = Vec::with_capacity(donors.len());
    for (i, d) in donors.iter().enumerate() {
        match describe(&d.keypoints, cfg.bins) {
            Ok(desc) => {
                donor_descs.push(desc);
                donor_ids.push(i);
            }
            Err(e) if cfg.strict => return Err(e),
            Err(e) => log::warn!("excluding donor {}: {e}", d.file_name()),
        }
    }
    if donor_descs.is_empty() {
        return Err(Error::Config("no donor has a usable pose".into()));
    }

    let worker = Worker {
        cfg,
        donors,
        donor_descs,
        donor_ids,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let rows: Vec<ManifestRow> = pool.install(|| {
        persons
            .par_iter()
            .enumerate()
            .map(|(i, p)| {
                if cfg.include_originals {
                    worker.copy_original(p)?;
                }
                worker.row_for(i, p)
            })
            .collect::<Result<_>>()
    })?;

    let manifest = SynthesisManifest {
        header: ManifestHeader {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: cfg.seed,
            slope_bin: cfg.bins.slope,
            height_bin: cfg.bins.height,
            scale_correct: cfg.scale_correct,
            include_originals: cfg.include_originals,
            persons: persons.len(),
            donors: donors.len(),
            donors_excluded: donors.len() - worker.donor_descs.len(),
            originals_written: if cfg.include_originals { persons.len() } else { 0 },
            persons_sha256: persons_digest(persons),
            donors_sha256: donors_digest(donors),
        },
        rows,
    };

    let report = stats(&manifest);
    manifest::write_atomic(&cfg.output_dir.join(STATS_TEXT_FILE), report.to_text().as_bytes())?;
    manifest::write_atomic(&cfg.output_dir.join(STATS_JSON_FILE), report.to_json().as_bytes())?;
    manifest.write_atomic(&manifest_path)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fake_names_keep_prefix_and_extension() {
        assert_eq!(fake_name("0002_c1s1_000451_03.jpg"), "0002_c1s1_000451_03_fake.jpg");
        assert_eq!(fake_name("a.b.png"), "a.b_fake.png");
        assert_eq!(fake_name("noext"), "noext_fake.png");
    }

    #[test]
    fn empty_donors_is_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SynthesisConfig::new(dir.path().join("out"), 1);
        assert!(matches!(synthesize(&[], &[], &cfg), Err(Error::Config(_))));
        assert!(!dir.path().join("out").exists());
    }

    #[test]
    fn invalid_bin_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = SynthesisConfig::new(dir.path(), 1);
        cfg.bins = Bins::uniform(0.0);
        assert!(matches!(synthesize(&[], &[], &cfg), Err(Error::InvalidParameter(_))));
    }
}
