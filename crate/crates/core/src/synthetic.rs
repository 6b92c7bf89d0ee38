//! Procedurally generated pedestrians and bicycle donors with known
//! keypoints. Used by the examples and tests; handy for smoke-testing the
//! pipeline without a real dataset.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ingest::{write_keypoint_file, DonorRecord, KeypointEntry, PersonRecord, PoseKeypoints, MASK_SUFFIX};
use crate::raster::{ImageBuffer, MaskBuffer, Point};

pub const KEYPOINTS_FILE: &str = "keypoints.json";

fn torso(hip: Point, length: f64, lean_deg: f64, shoulder_half: f64, facing_left: bool) -> PoseKeypoints {
    let (sin, cos) = lean_deg.to_radians().sin_cos();
    let neck = Point::new(hip.x + length * sin, hip.y - length * cos);
    // Shoulders are perpendicular to the torso through the neck.
    let across = Point::new(cos * shoulder_half, sin * shoulder_half);
    let (mut ls, mut rs) = (
        Point::new(neck.x - across.x, neck.y - across.y),
        Point::new(neck.x + across.x, neck.y + across.y),
    );
    let hip_half = shoulder_half * 0.6;
    let (mut lh, mut rh) = (
        Point::new(hip.x - cos * hip_half, hip.y - sin * hip_half),
        Point::new(hip.x + cos * hip_half, hip.y + sin * hip_half),
    );
    if facing_left {
        std::mem::swap(&mut ls, &mut rs);
        std::mem::swap(&mut lh, &mut rh);
    }
    PoseKeypoints::new(ls, rs, lh, rh, neck)
}

/// Checkerboard body of `width × height` with a torso band, deterministic in
/// `seed`.
pub fn pedestrian(width: u32, height: u32, seed: u64) -> Result<(ImageBuffer, PoseKeypoints)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (width as f64, height as f64);
    let hip = Point::new(w * rng.gen_range(0.4..0.6), h * rng.gen_range(0.5..0.6));
    let kp = torso(
        hip,
        h * rng.gen_range(0.2..0.3),
        rng.gen_range(-20.0..20.0),
        w * 0.18,
        rng.gen_bool(0.3),
    );
    let tint = [rng.gen_range(60..200u8), rng.gen_range(60..200u8), rng.gen_range(60..200u8)];
    let cell = (width / 8).max(2);
    let img = ImageBuffer::from_fn(width, height, |x, y| {
        let checker = ((x / cell) + (y / cell)).is_multiple_of(2);
        let body = (x as f64 - hip.x).abs() < w * 0.2 && (y as f64) > kp.neck.y - h * 0.08;
        match (body, checker) {
            (true, _) => tint,
            (false, true) => [220, 220, 220],
            (false, false) => [150, 160, 170],
        }
    })?;
    Ok((img, kp))
}

/// Rider pose over a two-wheel bicycle. The mask covers the bicycle only.
pub fn donor(size: u32, seed: u64) -> Result<(ImageBuffer, MaskBuffer, PoseKeypoints)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = size as f64;
    let hip = Point::new(s * rng.gen_range(0.45..0.55), s * rng.gen_range(0.42..0.5));
    let kp = torso(
        hip,
        s * rng.gen_range(0.15..0.25),
        rng.gen_range(-30.0..30.0),
        s * 0.08,
        rng.gen_bool(0.3),
    );
    let wheel_r = s * rng.gen_range(0.12..0.16);
    let wheel_y = s * 0.78;
    let wheels = [Point::new(s * 0.27, wheel_y), Point::new(s * 0.73, wheel_y)];
    let frame = [(hip, wheels[0]), (hip, wheels[1]), (wheels[0], wheels[1])];
    let thickness = (s * 0.025).max(1.5);
    let color = [rng.gen_range(0..255u8), rng.gen_range(0..120u8), rng.gen_range(0..255u8)];

    let on_bike = |x: f64, y: f64| {
        let p = Point::new(x, y);
        let tyre = wheels.iter().any(|c| (c.distance(p) - wheel_r).abs() <= thickness);
        tyre || frame.iter().any(|&(a, b)| segment_distance(p, a, b) <= thickness)
    };
    let mask = MaskBuffer::from_fn(size, size, |x, y| on_bike(x as f64 + 0.5, y as f64 + 0.5))?;
    let img = ImageBuffer::from_fn(size, size, |x, y| {
        if mask.get(x, y) {
            color
        } else if (y as f64) < wheel_y {
            [90, 140, 200]
        } else {
            [80, 90, 70]
        }
    })?;
    Ok((img, mask, kp))
}

fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0)
    };
    p.distance(Point::new(a.x + t * dx, a.y + t * dy))
}

/// Market1501-style name for the `index`-th image of `identity`.
pub fn person_file_name(identity: i64, camera: u32, index: usize) -> String {
    format!("{identity:04}_c{camera}s1_{index:06}_00.png")
}

/// `n` in-memory pedestrians spread over `identities` identities and six
/// cameras.
pub fn persons(n: usize, identities: usize, width: u32, height: u32, seed: u64) -> Result<Vec<PersonRecord>> {
    (0..n)
        .map(|i| {
            let identity = (i % identities.max(1)) as i64 + 1;
            let camera = (i % 6) as u32 + 1;
            let (image, keypoints) = pedestrian(width, height, seed.wrapping_add(i as u64))?;
            Ok(PersonRecord {
                image,
                keypoints,
                identity,
                camera,
                source_path: person_file_name(identity, camera, i).into(),
            })
        })
        .collect()
}

pub fn donors(m: usize, size: u32, seed: u64) -> Result<Vec<DonorRecord>> {
    (0..m)
        .map(|i| {
            let (image, mask, keypoints) = donor(size, seed.wrapping_add(1_000_003 * (i as u64 + 1)))?;
            DonorRecord::assemble(image, keypoints, mask, format!("bike_{i:03}.png"))
        })
        .collect()
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes pedestrians as PNG files plus `keypoints.json` into `dir`.
pub fn write_persons(dir: &Path, persons: &[PersonRecord]) -> Result<()> {
    create_dir(dir)?;
    let mut entries = Vec::new();
    for p in persons {
        let name = p.file_name();
        p.image.save(dir.join(&name))?;
        entries.push(KeypointEntry {
            file: name,
            keypoints: p.keypoints,
        });
    }
    write_keypoint_file(dir.join(KEYPOINTS_FILE), &entries)
}

/// Writes donors, their `.mask.png` masks and `keypoints.json` into `dir`.
pub fn write_donors(dir: &Path, donors: &[DonorRecord]) -> Result<()> {
    create_dir(dir)?;
    let mut entries = Vec::new();
    for d in donors {
        let name = d.file_name();
        d.image.save(dir.join(&name))?;
        let stem = name.rsplit_once('.').map(|(s, _)| s).unwrap_or(&name);
        let mask_path = dir.join(format!("{stem}{MASK_SUFFIX}"));
        d.mask.to_gray().save(&mask_path).map_err(|e| Error::image(&mask_path, e))?;
        entries.push(KeypointEntry {
            file: name,
            keypoints: d.keypoints,
        });
    }
    write_keypoint_file(dir.join(KEYPOINTS_FILE), &entries)
}
