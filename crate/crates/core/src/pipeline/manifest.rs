//! Tab-separated synthesis manifest.
//!
//! ```text
//! # posepaste-manifest v1
//! # <key>\t<value>            (header, one per line)
//! output_path\tpedestrian_path\t...   (column names)
//! <row>                       (one per attempted composite)
//! ```
//!
//! Absent values are written as `-`. Floats use six decimals so the file is
//! byte-stable across runs.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::Similarity;
use crate::pose::Orientation;
use crate::raster::Point;

pub const MAGIC: &str = "# posepaste-manifest v1";
pub const MANIFEST_FILE: &str = "manifest.tsv";

pub const COLUMNS: [&str; 16] = [
    "output_path",
    "pedestrian_path",
    "donor_path",
    "identity",
    "camera",
    "orientation",
    "theta_deg",
    "scale",
    "pivot_x",
    "pivot_y",
    "slope_residual_q",
    "height_residual_q",
    "relaxation_level",
    "pasted_pixels",
    "output_sha256",
    "skip_reason",
];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ManifestHeader {
    pub tool_version: String,
    pub seed: u64,
    pub slope_bin: f64,
    pub height_bin: f64,
    pub scale_correct: bool,
    pub include_originals: bool,
    pub persons: usize,
    pub donors: usize,
    pub donors_excluded: usize,
    pub originals_written: usize,
    pub persons_sha256: String,
    pub donors_sha256: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ManifestRow {
    /// Relative to the output directory.
    pub output_path: Option<String>,
    pub pedestrian_path: String,
    pub donor_path: Option<String>,
    pub identity: i64,
    pub camera: u32,
    pub orientation: Option<Orientation>,
    pub transform: Option<Similarity>,
    pub slope_residual_q: Option<f64>,
    pub height_residual_q: Option<f64>,
    pub relaxation_level: Option<u32>,
    pub pasted_pixels: usize,
    pub output_sha256: Option<String>,
    pub skip_reason: Option<String>,
}

impl ManifestRow {
    pub fn is_skip(&self) -> bool {
        self.skip_reason.is_some()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SynthesisManifest {
    pub header: ManifestHeader,
    pub rows: Vec<ManifestRow>,
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_else(|| "-".into())
}

fn float(v: f64) -> String {
    let s = format!("{v:.6}");
    // Avoid "-0.000000" so equal values always serialize identically.
    if s.trim_start_matches('-').bytes().all(|b| b == b'0' || b == b'.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

fn clean(text: &str) -> String {
    text.replace(['\t', '\n', '\r'], " ")
}

impl SynthesisManifest {
    pub fn fakes(&self) -> impl Iterator<Item = &ManifestRow> {
        self.rows.iter().filter(|r| !r.is_skip())
    }

    pub fn skips(&self) -> impl Iterator<Item = &ManifestRow> {
        self.rows.iter().filter(|r| r.is_skip())
    }

    pub fn to_tsv(&self) -> String {
        let h = &self.header;
        let mut out = String::new();
        out.push_str(MAGIC);
        out.push('\n');
        let header: [(&str, String); 12] = [
            ("tool_version", h.tool_version.clone()),
            ("seed", h.seed.to_string()),
            ("slope_bin", float(h.slope_bin)),
            ("height_bin", float(h.height_bin)),
            ("scale_correct", h.scale_correct.to_string()),
            ("include_originals", h.include_originals.to_string()),
            ("persons", h.persons.to_string()),
            ("donors", h.donors.to_string()),
            ("donors_excluded", h.donors_excluded.to_string()),
            ("originals_written", h.originals_written.to_string()),
            ("persons_sha256", h.persons_sha256.clone()),
            ("donors_sha256", h.donors_sha256.clone()),
        ];
        for (k, v) in header {
            let _ = writeln!(out, "# {k}\t{v}");
        }
        out.push_str(&COLUMNS.join("\t"));
        out.push('\n');
        for r in &self.rows {
            let t = r.transform;
            let fields = [
                opt(&r.output_path),
                clean(&r.pedestrian_path),
                opt(&r.donor_path.as_deref().map(clean)),
                r.identity.to_string(),
                r.camera.to_string(),
                opt(&r.orientation),
                opt(&t.map(|t| float(t.theta_deg))),
                opt(&t.map(|t| float(t.scale))),
                opt(&t.map(|t| float(t.pivot.x))),
                opt(&t.map(|t| float(t.pivot.y))),
                opt(&r.slope_residual_q.map(float)),
                opt(&r.height_residual_q.map(float)),
                opt(&r.relaxation_level),
                r.pasted_pixels.to_string(),
                opt(&r.output_sha256),
                opt(&r.skip_reason.as_deref().map(clean)),
            ];
            out.push_str(&fields.join("\t"));
            out.push('\n');
        }
        out
    }

    pub fn parse_tsv(text: &str, origin: &Path) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, MAGIC)) => {}
            _ => return Err(Error::parse(origin, "line 1", format!("expected {MAGIC:?}"))),
        }
        let mut header = ManifestHeader::default();
        let mut rows = Vec::new();
        let mut seen_columns = false;
        for (n, line) in lines {
            let at = format!("line {}", n + 1);
            let bad = |msg: String| Error::parse(origin, &at, msg);
            if let Some(kv) = line.strip_prefix("# ") {
                let (k, v) = kv.split_once('\t').ok_or_else(|| bad("header needs key<TAB>value".into()))?;
                let num = |v: &str| v.parse::<f64>().map_err(|e| bad(format!("{k}: {e}")));
                let int = |v: &str| v.parse::<usize>().map_err(|e| bad(format!("{k}: {e}")));
                let flag = |v: &str| v.parse::<bool>().map_err(|e| bad(format!("{k}: {e}")));
                match k {
                    "tool_version" => header.tool_version = v.to_string(),
                    "seed" => header.seed = v.parse().map_err(|e| bad(format!("seed: {e}")))?,
                    "slope_bin" => header.slope_bin = num(v)?,
                    "height_bin" => header.height_bin = num(v)?,
                    "scale_correct" => header.scale_correct = flag(v)?,
                    "include_originals" => header.include_originals = flag(v)?,
                    "persons" => header.persons = int(v)?,
                    "donors" => header.donors = int(v)?,
                    "donors_excluded" => header.donors_excluded = int(v)?,
                    "originals_written" => header.originals_written = int(v)?,
                    "persons_sha256" => header.persons_sha256 = v.to_string(),
                    "donors_sha256" => header.donors_sha256 = v.to_string(),
                    _ => log::warn!("{}: ignoring unknown header key {k:?}", origin.display()),
                }
                continue;
            }
            if !seen_columns {
                if line.split('\t').ne(COLUMNS.iter().copied()) {
                    return Err(bad("unexpected column header".into()));
                }
                seen_columns = true;
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != COLUMNS.len() {
                return Err(bad(format!("expected {} fields, found {}", COLUMNS.len(), f.len())));
            }
            let text = |s: &str| (s != "-").then(|| s.to_string());
            fn parsed<T: std::str::FromStr>(s: &str) -> std::result::Result<Option<T>, String>
            where
                T::Err: std::fmt::Display,
            {
                if s == "-" {
                    return Ok(None);
                }
                s.parse().map(Some).map_err(|e: T::Err| format!("{s:?}: {e}"))
            }
            let floats: Vec<Option<f64>> = [f[6], f[7], f[8], f[9], f[10], f[11]]
                .iter()
                .map(|s| parsed::<f64>(s))
                .collect::<std::result::Result<_, _>>()
                .map_err(bad)?;
            let transform = match (floats[0], floats[1], floats[2], floats[3]) {
                (Some(theta_deg), Some(scale), Some(x), Some(y)) => Some(Similarity {
                    theta_deg,
                    scale,
                    pivot: Point::new(x, y),
                }),
                _ => None,
            };
            rows.push(ManifestRow {
                output_path: text(f[0]),
                pedestrian_path: f[1].to_string(),
                donor_path: text(f[2]),
                identity: f[3].parse().map_err(|e| bad(format!("identity: {e}")))?,
                camera: f[4].parse().map_err(|e| bad(format!("camera: {e}")))?,
                orientation: parsed::<Orientation>(f[5]).map_err(bad)?,
                transform,
                slope_residual_q: floats[4],
                height_residual_q: floats[5],
                relaxation_level: parsed::<u32>(f[12]).map_err(bad)?,
                pasted_pixels: f[13].parse().map_err(|e| bad(format!("pasted_pixels: {e}")))?,
                output_sha256: text(f[14]),
                skip_reason: text(f[15]),
            });
        }
        if !seen_columns {
            return Err(Error::parse(origin, "header", "missing column header"));
        }
        Ok(SynthesisManifest { header, rows })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_tsv(&text, path)
    }

    /// Writes to a temporary sibling and renames it into place, so readers
    /// never observe a partial manifest.
    pub fn write_atomic(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), self.to_tsv().as_bytes())
    }
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("partial");
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
