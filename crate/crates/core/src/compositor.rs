//! Cut the donor object out through its mask and paste it onto the
//! pedestrian, aligning the donor's mid-hip with the pedestrian's.
//!
//! Pasting is integer-pixel with hard binary alpha: the pixel containing the
//! sprite anchor lands on the pixel containing the target point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{warp_image, warp_mask, AffineTransform};
use crate::ingest::{DonorRecord, PersonRecord};
use crate::pose::mid_hip;
use crate::raster::{ImageBuffer, MaskBuffer, Point};

#[derive(Clone, Debug, PartialEq)]
pub struct Sprite {
    width: u32,
    height: u32,
    pixels: Vec<[u8; 3]>,
    alpha: Vec<bool>,
    /// Donor mid-hip in sprite coordinates.
    pub anchor: Point,
}

impl Sprite {
    pub fn empty() -> Self {
        Sprite {
            width: 0,
            height: 0,
            pixels: Vec::new(),
            alpha: Vec::new(),
            anchor: Point::default(),
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn is_empty(&self) -> bool {
        !self.alpha.iter().any(|&a| a)
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        self.pixels[(y * self.width + x) as usize]
    }

    pub fn alpha(&self, x: u32, y: u32) -> bool {
        self.alpha[(y * self.width + x) as usize]
    }

    pub fn opaque_count(&self) -> usize {
        self.alpha.iter().filter(|&&a| a).count()
    }

    /// Top-left corner of the sprite in base coordinates when its anchor
    /// is pasted at `target`.
    pub fn placement(&self, target: Point) -> (i64, i64) {
        let (ax, ay) = self.anchor.pixel();
        let (tx, ty) = target.pixel();
        (tx - ax, ty - ay)
    }
}

/// Crops `img` to the bounding box of `mask`. An all-zero mask yields
/// [`EmptyMask`].
pub fn extract_object(img: &ImageBuffer, mask: &MaskBuffer, anchor: Point) -> Result<Sprite, EmptyMask> {
    assert_eq!(img.dimensions(), mask.dimensions(), "image and mask dimensions differ");
    let (x0, y0, x1, y1) = mask.bounding_box().ok_or(EmptyMask)?;
    let (w, h) = (x1 - x0, y1 - y0);
    let mut pixels = Vec::with_capacity((w * h) as usize);
    let mut alpha = Vec::with_capacity((w * h) as usize);
    for y in y0..y1 {
        for x in x0..x1 {
            pixels.push(img.get(x, y));
            alpha.push(mask.get(x, y));
        }
    }
    Ok(Sprite {
        width: w,
        height: h,
        pixels,
        alpha,
        anchor: Point::new(anchor.x - x0 as f64, anchor.y - y0 as f64),
    })
}

/// The donor mask had no set pixels (after warping, if any).
#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("donor mask is empty")]
pub struct EmptyMask;

impl From<EmptyMask> for Error {
    fn from(_: EmptyMask) -> Self {
        Error::Contract("donor mask is empty")
    }
}

/// Pastes `sprite` so its anchor pixel lands on `target`'s pixel, clipping
/// anything outside `base`. Returns the image and the number of pixels
/// written.
pub fn paste(base: &ImageBuffer, sprite: &Sprite, target: Point) -> (ImageBuffer, usize) {
    let mut out = base.clone();
    let (ox, oy) = sprite.placement(target);
    let (bw, bh) = (base.width() as i64, base.height() as i64);
    let mut written = 0;
    for sy in 0..sprite.height {
        let y = oy + sy as i64;
        if y < 0 || y >= bh {
            continue;
        }
        for sx in 0..sprite.width {
            let x = ox + sx as i64;
            if x < 0 || x >= bw || !sprite.alpha(sx, sy) {
                continue;
            }
            out.put(x as u32, y as u32, sprite.pixel(sx, sy));
            written += 1;
        }
    }
    (out, written)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompositeMeta {
    pub transform: AffineTransform,
    /// Warped donor mid-hip in sprite coordinates.
    pub anchor: Point,
    /// Pedestrian mid-hip.
    pub target: Point,
    /// Sprite top-left in pedestrian coordinates.
    pub offset: (i64, i64),
    pub pasted_pixels: usize,
    pub skipped: Option<String>,
}

#[derive(Clone, Debug)]
pub struct Composite {
    pub image: ImageBuffer,
    pub meta: CompositeMeta,
}

/// Warps the donor by `t`, cuts out its object and pastes it onto the
/// pedestrian. The donor is warped onto a canvas covering its whole
/// transformed extent so rotation never clips the object.
pub fn compose_fake(p: &PersonRecord, d: &DonorRecord, t: &AffineTransform) -> Result<Composite> {
    let (lo, hi) = t.bounds(d.image.width(), d.image.height());
    let (x0, y0) = (lo.x.floor(), lo.y.floor());
    let canvas_w = ((hi.x.ceil() - x0) as u32).max(1);
    let canvas_h = ((hi.y.ceil() - y0) as u32).max(1);
    let placed = t.then(&AffineTransform::translation(-x0, -y0));

    let warped_mask = warp_mask(&d.mask, &placed, canvas_w, canvas_h)?;
    let target = mid_hip(p.keypoints.left_hip, p.keypoints.right_hip);
    let donor_hip = mid_hip(d.keypoints.left_hip, d.keypoints.right_hip);
    let warped_hip = placed.apply(donor_hip);

    let mut meta = CompositeMeta {
        transform: *t,
        anchor: warped_hip,
        target,
        offset: (0, 0),
        pasted_pixels: 0,
        skipped: None,
    };
    if warped_mask.is_empty() {
        meta.skipped = Some("empty donor mask".into());
        return Ok(Composite {
            image: p.image.clone(),
            meta,
        });
    }

    let warped = warp_image(&d.image, &placed, canvas_w, canvas_h)?;
    let sprite = extract_object(&warped, &warped_mask, warped_hip)?;
    let (image, written) = paste(&p.image, &sprite, target);
    meta.anchor = sprite.anchor;
    meta.offset = sprite.placement(target);
    meta.pasted_pixels = written;
    Ok(Composite { image, meta })
}
