//! Keypoint annotations, masks and dataset assembly.
//!
//! Annotation files are JSON arrays. Each entry names an image via `"file"`
//! (relative to the dataset directory) and carries exactly one of
//!
//! * `"named_points"`: `{ "<landmark>": [x, y, confidence], ... }` with the
//!   landmarks `left_shoulder`, `right_shoulder`, `left_hip`, `right_hip`
//!   and `neck`; extra names are ignored.
//! * `"coco17"`: seventeen `[x, y, confidence]` triples in the usual COCO body
//!   order. COCO has no neck, so it is placed at the shoulder midpoint.
//!
//! Landmarks whose confidence is below [`MIN_CONFIDENCE`] count as missing and
//! the entry is skipped (and reported) rather than failing the whole file.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{ImageBuffer, MaskBuffer, Point};

pub const MIN_CONFIDENCE: f64 = 0.3;

/// Suffix that pairs a donor image `x.jpg` with its mask `x.mask.png`.
pub const MASK_SUFFIX: &str = ".mask.png";

const COCO_LEFT_SHOULDER: usize = 5;
const COCO_RIGHT_SHOULDER: usize = 6;
const COCO_LEFT_HIP: usize = 11;
const COCO_RIGHT_HIP: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Landmark {
    LeftShoulder,
    RightShoulder,
    LeftHip,
    RightHip,
    Neck,
}

impl Landmark {
    pub const ALL: [Landmark; 5] = [
        Landmark::LeftShoulder,
        Landmark::RightShoulder,
        Landmark::LeftHip,
        Landmark::RightHip,
        Landmark::Neck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Landmark::LeftShoulder => "left_shoulder",
            Landmark::RightShoulder => "right_shoulder",
            Landmark::LeftHip => "left_hip",
            Landmark::RightHip => "right_hip",
            Landmark::Neck => "neck",
        }
    }
}

/// The five torso landmarks used for matching, in image pixels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoseKeypoints {
    pub left_shoulder: Point,
    pub right_shoulder: Point,
    pub left_hip: Point,
    pub right_hip: Point,
    pub neck: Point,
    /// Indexed in [`Landmark::ALL`] order.
    pub confidences: [f64; 5],
}

impl PoseKeypoints {
    /// Fully confident keypoints.
    pub fn new(left_shoulder: Point, right_shoulder: Point, left_hip: Point, right_hip: Point, neck: Point) -> Self {
        PoseKeypoints {
            left_shoulder,
            right_shoulder,
            left_hip,
            right_hip,
            neck,
            confidences: [1.0; 5],
        }
    }

    pub fn get(&self, landmark: Landmark) -> Point {
        match landmark {
            Landmark::LeftShoulder => self.left_shoulder,
            Landmark::RightShoulder => self.right_shoulder,
            Landmark::LeftHip => self.left_hip,
            Landmark::RightHip => self.right_hip,
            Landmark::Neck => self.neck,
        }
    }

    pub fn confidence(&self, landmark: Landmark) -> f64 {
        self.confidences[landmark as usize]
    }

    /// Applies `f` to every landmark, keeping confidences.
    pub fn map_points(&self, mut f: impl FnMut(Point) -> Point) -> Self {
        PoseKeypoints {
            left_shoulder: f(self.left_shoulder),
            right_shoulder: f(self.right_shoulder),
            left_hip: f(self.left_hip),
            right_hip: f(self.right_hip),
            neck: f(self.neck),
            confidences: self.confidences,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KeypointEntry {
    pub file: String,
    pub keypoints: PoseKeypoints,
}

/// Something that was left out of a dataset, and why.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Skip {
    pub file: String,
    pub reason: String,
}

#[derive(Clone, Debug, Default)]
pub struct KeypointFile {
    pub entries: Vec<KeypointEntry>,
    pub skipped: Vec<Skip>,
}

#[derive(Debug, Deserialize, Serialize)]
struct RawEntry {
    file: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    named_points: Option<BTreeMap<String, [f64; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coco17: Option<Vec<[f64; 3]>>,
}

pub fn parse_keypoint_file(path: impl AsRef<Path>) -> Result<KeypointFile> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_keypoints_str(&text, path, MIN_CONFIDENCE)
}

/// Parses annotation text; `origin` is only used in error messages.
pub fn parse_keypoints_str(text: &str, origin: &Path, min_confidence: f64) -> Result<KeypointFile> {
    let raw: Vec<RawEntry> = serde_json::from_str(text)
        .map_err(|e| Error::parse(origin, format!("at line {} column {}", e.line(), e.column()), e.to_string()))?;

    let mut out = KeypointFile::default();
    for (index, entry) in raw.into_iter().enumerate() {
        let label = format!("#{index} ({:?})", entry.file);
        let points = match (&entry.named_points, &entry.coco17) {
            (Some(named), None) => from_named(named),
            (None, Some(coco)) => {
                if coco.len() != 17 {
                    return Err(Error::parse(
                        origin,
                        label,
                        format!("coco17 has {} points, expected 17", coco.len()),
                    ));
                }
                from_coco17(coco)
            }
            _ => {
                return Err(Error::parse(
                    origin,
                    label,
                    "exactly one of \"named_points\" or \"coco17\" is required",
                ))
            }
        };

        let mut landmarks = [(Point::default(), 0.0); 5];
        let mut missing = Vec::new();
        for (slot, (landmark, value)) in landmarks.iter_mut().zip(Landmark::ALL.iter().zip(points)) {
            match value {
                Some([x, y, c]) => {
                    if !(x.is_finite() && y.is_finite()) {
                        return Err(Error::parse(origin, &label, format!("{} is not finite", landmark.name())));
                    }
                    if !(0.0..=1.0).contains(&c) {
                        return Err(Error::parse(
                            origin,
                            &label,
                            format!("{} confidence {c} outside [0, 1]", landmark.name()),
                        ));
                    }
                    if c < min_confidence {
                        missing.push(landmark.name());
                    }
                    *slot = (Point::new(x, y), c);
                }
                None => missing.push(landmark.name()),
            }
        }

        if !missing.is_empty() {
            out.skipped.push(Skip {
                file: entry.file,
                reason: format!("missing landmarks: {}", missing.join(", ")),
            });
            continue;
        }
        let [ls, rs, lh, rh, neck] = landmarks;
        out.entries.push(KeypointEntry {
            file: entry.file,
            keypoints: PoseKeypoints {
                left_shoulder: ls.0,
                right_shoulder: rs.0,
                left_hip: lh.0,
                right_hip: rh.0,
                neck: neck.0,
                confidences: [ls.1, rs.1, lh.1, rh.1, neck.1],
            },
        });
    }
    Ok(out)
}

fn from_named(named: &BTreeMap<String, [f64; 3]>) -> [Option<[f64; 3]>; 5] {
    Landmark::ALL.map(|l| named.get(l.name()).copied())
}

fn from_coco17(coco: &[[f64; 3]]) -> [Option<[f64; 3]>; 5] {
    let ls = coco[COCO_LEFT_SHOULDER];
    let rs = coco[COCO_RIGHT_SHOULDER];
    let neck = [(ls[0] + rs[0]) / 2.0, (ls[1] + rs[1]) / 2.0, ls[2].min(rs[2])];
    [
        Some(ls),
        Some(rs),
        Some(coco[COCO_LEFT_HIP]),
        Some(coco[COCO_RIGHT_HIP]),
        Some(neck),
    ]
}

/// Serializes entries in the `named_points` form.
pub fn keypoints_to_json(entries: &[KeypointEntry]) -> String {
    let raw: Vec<RawEntry> = entries
        .iter()
        .map(|e| RawEntry {
            file: e.file.clone(),
            named_points: Some(
                Landmark::ALL
                    .iter()
                    .map(|&l| {
                        let p = e.keypoints.get(l);
                        (l.name().to_string(), [p.x, p.y, e.keypoints.confidence(l)])
                    })
                    .collect(),
            ),
            coco17: None,
        })
        .collect();
    serde_json::to_string_pretty(&raw).expect("keypoint entries always serialize")
}

pub fn write_keypoint_file(path: impl AsRef<Path>, entries: &[KeypointEntry]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, keypoints_to_json(entries)).map_err(|e| Error::io(path, e))
}

pub fn load_mask(path: impl AsRef<Path>) -> Result<MaskBuffer> {
    let path = path.as_ref();
    let img = image::open(path).map_err(|e| Error::image(path, e))?;
    MaskBuffer::from_gray(&img.into_luma8()).map_err(|_| Error::parse(path, "mask", "mask has zero area"))
}

/// Identity and camera from a Market1501/DukeMTMC style name
/// (`0002_c1s1_000451_03.jpg`, `0005_c2_f0046985.jpg`). Junk images carry
/// identity `-1`.
pub fn parse_person_filename(name: &str) -> Option<(i64, u32)> {
    let mut parts = name.split('_');
    let identity = parts.next()?.parse::<i64>().ok()?;
    let cam = parts.next()?.strip_prefix('c')?;
    let digits: String = cam.chars().take_while(|c| c.is_ascii_digit()).collect();
    if digits.is_empty() {
        return None;
    }
    Some((identity, digits.parse().ok()?))
}

#[derive(Clone, Debug)]
pub struct PersonRecord {
    pub image: ImageBuffer,
    pub keypoints: PoseKeypoints,
    pub identity: i64,
    pub camera: u32,
    pub source_path: PathBuf,
}

impl PersonRecord {
    /// File name component of `source_path`.
    pub fn file_name(&self) -> String {
        file_name(&self.source_path)
    }
}

#[derive(Clone, Debug)]
pub struct DonorRecord {
    pub image: ImageBuffer,
    pub keypoints: PoseKeypoints,
    pub mask: MaskBuffer,
    pub source_path: PathBuf,
}

impl DonorRecord {
    /// Pairs a donor image with its mask; dimensions must agree.
    pub fn assemble(image: ImageBuffer, keypoints: PoseKeypoints, mask: MaskBuffer, source_path: impl Into<PathBuf>) -> Result<Self> {
        let source_path = source_path.into();
        if image.dimensions() != mask.dimensions() {
            return Err(Error::DimensionMismatch {
                path: source_path,
                image_w: image.width(),
                image_h: image.height(),
                mask_w: mask.width(),
                mask_h: mask.height(),
            });
        }
        Ok(DonorRecord {
            image,
            keypoints,
            mask,
            source_path,
        })
    }

    pub fn file_name(&self) -> String {
        file_name(&self.source_path)
    }
}

pub(crate) fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.to_string_lossy().into_owned())
}

#[derive(Clone, Copy, Debug, Default)]
pub struct LoadOptions {
    /// Unparseable person filenames and donor assembly failures become errors
    /// instead of skips.
    pub strict: bool,
}

#[derive(Clone, Debug)]
pub struct Loaded<T> {
    pub records: Vec<T>,
    pub skipped: Vec<Skip>,
}

fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if !path.is_file() {
            continue;
        }
        let name = file_name(&path);
        if name.ends_with(MASK_SUFFIX) {
            continue;
        }
        let ext = path
            .extension()
            .map(|e| e.to_string_lossy().to_ascii_lowercase())
            .unwrap_or_default();
        if matches!(ext.as_str(), "jpg" | "jpeg" | "png") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

struct Annotations {
    by_file: HashMap<String, PoseKeypoints>,
    skipped: HashMap<String, String>,
}

fn read_annotations(path: &Path) -> Result<Annotations> {
    let parsed = parse_keypoint_file(path)?;
    Ok(Annotations {
        by_file: parsed.entries.into_iter().map(|e| (e.file, e.keypoints)).collect(),
        skipped: parsed.skipped.into_iter().map(|s| (s.file, s.reason)).collect(),
    })
}

impl Annotations {
    fn lookup(&self, name: &str) -> std::result::Result<PoseKeypoints, String> {
        if let Some(kp) = self.by_file.get(name) {
            return Ok(*kp);
        }
        Err(self.skipped.get(name).cloned().unwrap_or_else(|| "no annotation".to_string()))
    }
}

enum Item<T> {
    Record(T),
    Skip(Skip),
}

fn split<T>(items: Vec<Result<Item<T>>>) -> Result<Loaded<T>> {
    let mut records = Vec::new();
    let mut skipped = Vec::new();
    for item in items {
        match item? {
            Item::Record(r) => records.push(r),
            Item::Skip(s) => {
                log::debug!("skipping {}: {}", s.file, s.reason);
                skipped.push(s)
            }
        }
    }
    Ok(Loaded { records, skipped })
}

/// Loads every annotated image of a pedestrian directory, sorted by path.
pub fn load_person_dataset(dir: impl AsRef<Path>, annotations: impl AsRef<Path>, opts: LoadOptions) -> Result<Loaded<PersonRecord>> {
    let dir = dir.as_ref();
    let annotations = read_annotations(annotations.as_ref())?;
    let files = list_images(dir)?;

    let items: Vec<Result<Item<PersonRecord>>> = files
        .par_iter()
        .map(|path| {
            let name = file_name(path);
            let skip = |reason: String| {
                Ok(Item::Skip(Skip {
                    file: name.clone(),
                    reason,
                }))
            };
            let (identity, camera) = match parse_person_filename(&name) {
                Some(ids) => ids,
                None if opts.strict => {
                    return Err(Error::parse(path, "filename", "expected <identity>_c<camera>... naming"));
                }
                None => return skip("unparseable filename".into()),
            };
            if identity < 0 {
                return skip("junk identity".into());
            }
            let keypoints = match annotations.lookup(&name) {
                Ok(kp) => kp,
                Err(reason) => return skip(reason),
            };
            let image = ImageBuffer::load(path)?;
            Ok(Item::Record(PersonRecord {
                image,
                keypoints,
                identity,
                camera,
                source_path: path.clone(),
            }))
        })
        .collect();
    split(items)
}

/// Loads donor images with their `<stem>.mask.png` masks, looked up in
/// `mask_dir` (defaults to `dir`).
pub fn load_donor_dataset(
    dir: impl AsRef<Path>,
    annotations: impl AsRef<Path>,
    mask_dir: Option<&Path>,
    opts: LoadOptions,
) -> Result<Loaded<DonorRecord>> {
    let dir = dir.as_ref();
    let mask_dir = mask_dir.unwrap_or(dir);
    let annotations = read_annotations(annotations.as_ref())?;
    let files = list_images(dir)?;

    let items: Vec<Result<Item<DonorRecord>>> = files
        .par_iter()
        .map(|path| {
            let name = file_name(path);
            let keypoints = match annotations.lookup(&name) {
                Ok(kp) => kp,
                Err(reason) => return Ok(Item::Skip(Skip { file: name, reason })),
            };
            let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let mask_path = mask_dir.join(format!("{stem}{MASK_SUFFIX}"));
            let assembled = ImageBuffer::load(path).and_then(|image| {
                let mask = load_mask(&mask_path)?;
                DonorRecord::assemble(image, keypoints, mask, path.clone())
            });
            match assembled {
                Ok(record) => Ok(Item::Record(record)),
                Err(e) if opts.strict => Err(e),
                Err(e) => Ok(Item::Skip(Skip {
                    file: name,
                    reason: e.to_string(),
                })),
            }
        })
        .collect();
    split(items)
}
