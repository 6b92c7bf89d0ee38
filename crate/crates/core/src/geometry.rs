//! Similarity transforms that bring a donor's torso into line with a
//! pedestrian's, and inverse-mapping raster warps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pose::{wrap_degrees, PoseDescriptor};
use crate::raster::{ImageBuffer, MaskBuffer, Point};

const MIN_DETERMINANT: f64 = 1e-12;

/// 2×3 affine matrix `[a b tx; c d ty]` acting on column vectors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineTransform {
    pub m: [[f64; 3]; 2],
}

impl Default for AffineTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl AffineTransform {
    pub const fn identity() -> Self {
        AffineTransform {
            m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
        }
    }

    pub const fn translation(tx: f64, ty: f64) -> Self {
        AffineTransform {
            m: [[1.0, 0.0, tx], [0.0, 1.0, ty]],
        }
    }

    /// Uniform scale `s` and clockwise-on-screen rotation `degrees`, both
    /// about `pivot`.
    pub fn similarity_about(degrees: f64, s: f64, pivot: Point) -> Self {
        let (sin, cos) = degrees.to_radians().sin_cos();
        let (a, b, c, d) = (s * cos, -s * sin, s * sin, s * cos);
        AffineTransform {
            m: [
                [a, b, pivot.x - a * pivot.x - b * pivot.y],
                [c, d, pivot.y - c * pivot.x - d * pivot.y],
            ],
        }
    }

    pub fn rotation_about(degrees: f64, pivot: Point) -> Self {
        Self::similarity_about(degrees, 1.0, pivot)
    }

    pub fn scale_about(s: f64, pivot: Point) -> Self {
        Self::similarity_about(0.0, s, pivot)
    }

    pub fn determinant(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn is_invertible(&self) -> bool {
        let det = self.determinant();
        det.is_finite() && det.abs() > MIN_DETERMINANT
    }

    pub fn apply(&self, p: Point) -> Point {
        let [[a, b, tx], [c, d, ty]] = self.m;
        Point::new(a * p.x + b * p.y + tx, c * p.x + d * p.y + ty)
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &AffineTransform) -> AffineTransform {
        let [[a1, b1, tx1], [c1, d1, ty1]] = self.m;
        let [[a2, b2, tx2], [c2, d2, ty2]] = next.m;
        AffineTransform {
            m: [
                [a2 * a1 + b2 * c1, a2 * b1 + b2 * d1, a2 * tx1 + b2 * ty1 + tx2],
                [c2 * a1 + d2 * c1, c2 * b1 + d2 * d1, c2 * tx1 + d2 * ty1 + ty2],
            ],
        }
    }

    pub fn inverse(&self) -> Result<AffineTransform> {
        let det = self.determinant();
        if !self.is_invertible() {
            return Err(Error::NonInvertible(det));
        }
        let [[a, b, tx], [c, d, ty]] = self.m;
        let (ia, ib, ic, id) = (d / det, -b / det, -c / det, a / det);
        Ok(AffineTransform {
            m: [[ia, ib, -(ia * tx + ib * ty)], [ic, id, -(ic * tx + id * ty)]],
        })
    }

    /// Axis-aligned bounds `(min, max)` of the image of a `width × height`
    /// raster.
    pub fn bounds(&self, width: u32, height: u32) -> (Point, Point) {
        let (w, h) = (width as f64, height as f64);
        let corners = [(0.0, 0.0), (w, 0.0), (0.0, h), (w, h)].map(|(x, y)| self.apply(Point::new(x, y)));
        let fold = |f: fn(f64, f64) -> f64, init: f64, get: fn(&Point) -> f64| corners.iter().map(get).fold(init, f);
        (
            Point::new(fold(f64::min, f64::INFINITY, |p| p.x), fold(f64::min, f64::INFINITY, |p| p.y)),
            Point::new(
                fold(f64::max, f64::NEG_INFINITY, |p| p.x),
                fold(f64::max, f64::NEG_INFINITY, |p| p.y),
            ),
        )
    }
}

/// Rotation/scale parameters of a pose correction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Similarity {
    pub theta_deg: f64,
    pub scale: f64,
    pub pivot: Point,
}

impl Similarity {
    pub fn to_affine(&self) -> AffineTransform {
        AffineTransform::similarity_about(self.theta_deg, self.scale, self.pivot)
    }
}

/// Rotation (and optionally scale) about the donor's mid-hip that maps the
/// donor torso onto the pedestrian's slope and, with `scale_correct`, length.
pub fn similarity_from_match(p: &PoseDescriptor, d: &PoseDescriptor, scale_correct: bool) -> Result<Similarity> {
    if d.height_raw.is_nan() || p.height_raw.is_nan() || d.height_raw <= 0.0 || p.height_raw <= 0.0 {
        return Err(Error::DegeneratePose("zero torso length"));
    }
    Ok(Similarity {
        theta_deg: wrap_degrees(p.slope_raw - d.slope_raw),
        scale: if scale_correct { p.height_raw / d.height_raw } else { 1.0 },
        pivot: d.mid_hip,
    })
}

pub fn affine_from_match(p: &PoseDescriptor, d: &PoseDescriptor, scale_correct: bool) -> Result<AffineTransform> {
    Ok(similarity_from_match(p, d, scale_correct)?.to_affine())
}

pub fn apply_to_point(t: &AffineTransform, p: Point) -> Point {
    t.apply(p)
}

/// Inverse-maps each output pixel center into the source and samples it
/// bilinearly. Samples falling outside the source are black.
pub fn warp_image(img: &ImageBuffer, t: &AffineTransform, out_w: u32, out_h: u32) -> Result<ImageBuffer> {
    let inv = t.inverse()?;
    let mut out = ImageBuffer::new(out_w, out_h)?;
    let (w, h) = (img.width() as f64, img.height() as f64);
    let (max_x, max_y) = (img.width() as i64 - 1, img.height() as i64 - 1);
    for y in 0..out_h {
        for x in 0..out_w {
            let s = inv.apply(Point::new(x as f64 + 0.5, y as f64 + 0.5));
            if !(s.x >= 0.0 && s.x < w && s.y >= 0.0 && s.y < h) {
                continue;
            }
            let (u, v) = (s.x - 0.5, s.y - 0.5);
            let (x0, y0) = (u.floor(), v.floor());
            let (fx, fy) = (u - x0, v - y0);
            let (x0, y0) = (x0 as i64, y0 as i64);
            let xa = x0.clamp(0, max_x) as u32;
            let xb = (x0 + 1).clamp(0, max_x) as u32;
            let ya = y0.clamp(0, max_y) as u32;
            let yb = (y0 + 1).clamp(0, max_y) as u32;
            let (p00, p10, p01, p11) = (img.get(xa, ya), img.get(xb, ya), img.get(xa, yb), img.get(xb, yb));
            let mut rgb = [0u8; 3];
            for (ch, value) in rgb.iter_mut().enumerate() {
                let top = p00[ch] as f64 * (1.0 - fx) + p10[ch] as f64 * fx;
                let bottom = p01[ch] as f64 * (1.0 - fx) + p11[ch] as f64 * fx;
                *value = (top * (1.0 - fy) + bottom * fy).round().clamp(0.0, 255.0) as u8;
            }
            out.put(x, y, rgb);
        }
    }
    Ok(out)
}

/// Same mapping as [`warp_image`] with nearest-neighbour sampling, so the
/// result stays binary.
pub fn warp_mask(mask: &MaskBuffer, t: &AffineTransform, out_w: u32, out_h: u32) -> Result<MaskBuffer> {
    let inv = t.inverse()?;
    let mut out = MaskBuffer::new(out_w, out_h)?;
    let (w, h) = (mask.width() as f64, mask.height() as f64);
    for y in 0..out_h {
        for x in 0..out_w {
            let s = inv.apply(Point::new(x as f64 + 0.5, y as f64 + 0.5));
            if s.x >= 0.0 && s.x < w && s.y >= 0.0 && s.y < h && mask.get(s.x as u32, s.y as u32) {
                out.set(x, y, true);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pose::Orientation;

    fn close(a: Point, b: Point, tol: f64) -> bool {
        (a.x - b.x).abs() <= tol && (a.y - b.y).abs() <= tol
    }

    fn descriptor(slope: f64, height: f64, hip: Point) -> PoseDescriptor {
        PoseDescriptor {
            orientation: Orientation::Right,
            slope_raw: slope,
            slope_q: slope,
            height_raw: height,
            height_q: height,
            mid_hip: hip,
            neck: Point::new(hip.x + height * slope.to_radians().sin(), hip.y - height * slope.to_radians().cos()),
        }
    }

    #[test]
    fn equal_slopes_give_identity() {
        let p = descriptor(12.0, 50.0, Point::new(3.0, 4.0));
        let d = descriptor(12.0, 70.0, Point::new(30.0, 40.0));
        let t = affine_from_match(&p, &d, false).unwrap();
        assert_eq!(t, AffineTransform::identity());
    }

    #[test]
    fn quarter_turn_is_clockwise_on_screen() {
        let t = AffineTransform::rotation_about(90.0, Point::new(0.0, 0.0));
        assert!(close(t.apply(Point::new(1.0, 0.0)), Point::new(0.0, 1.0), 1e-12));
        let t = AffineTransform::rotation_about(90.0, Point::new(10.0, 10.0));
        assert!(close(t.apply(Point::new(11.0, 10.0)), Point::new(10.0, 11.0), 1e-12));
    }

    #[test]
    fn quarter_turn_from_descriptors() {
        let p = descriptor(90.0, 60.0, Point::new(0.0, 0.0));
        let d = descriptor(0.0, 60.0, Point::new(10.0, 10.0));
        let t = affine_from_match(&p, &d, true).unwrap();
        assert!(close(t.apply(Point::new(11.0, 10.0)), Point::new(10.0, 11.0), 1e-12));
    }

    #[test]
    fn apply_examples() {
        assert_eq!(
            apply_to_point(&AffineTransform::identity(), Point::new(5.0, 7.0)),
            Point::new(5.0, 7.0)
        );
        assert_eq!(
            apply_to_point(&AffineTransform::translation(3.0, -2.0), Point::new(0.0, 0.0)),
            Point::new(3.0, -2.0)
        );
        assert_eq!(
            apply_to_point(&AffineTransform::scale_about(2.0, Point::default()), Point::new(1.0, 1.0)),
            Point::new(2.0, 2.0)
        );
    }

    #[test]
    fn inverse_and_composition() {
        let t = AffineTransform::similarity_about(33.0, 1.7, Point::new(4.0, -9.0)).then(&AffineTransform::translation(2.0, 5.0));
        let round = t.then(&t.inverse().unwrap());
        let q = Point::new(123.0, -45.0);
        assert!(close(round.apply(q), q, 1e-9));
        assert!((t.determinant() - 1.7 * 1.7).abs() < 1e-12);
    }

    #[test]
    fn singular_transform_rejected() {
        let t = AffineTransform {
            m: [[1.0, 2.0, 0.0], [2.0, 4.0, 0.0]],
        };
        assert!(matches!(t.inverse(), Err(Error::NonInvertible(_))));
        let img = ImageBuffer::new(2, 2).unwrap();
        assert!(warp_image(&img, &t, 2, 2).is_err());
        assert!(warp_mask(&MaskBuffer::new(2, 2).unwrap(), &t, 2, 2).is_err());
    }

    #[test]
    fn zero_height_donor_rejected() {
        let p = descriptor(0.0, 50.0, Point::default());
        let mut d = descriptor(0.0, 50.0, Point::default());
        d.height_raw = 0.0;
        assert!(affine_from_match(&p, &d, true).is_err());
    }

    fn pattern(w: u32, h: u32) -> ImageBuffer {
        ImageBuffer::from_fn(w, h, |x, y| {
            [(x * 37 % 256) as u8, (y * 53 % 256) as u8, ((x + y) * 11 % 256) as u8]
        })
        .unwrap()
    }

    #[test]
    fn identity_warp_is_exact() {
        let img = pattern(13, 9);
        assert_eq!(warp_image(&img, &AffineTransform::identity(), 13, 9).unwrap(), img);
    }

    #[test]
    fn translation_shifts_rows() {
        let img = pattern(12, 4);
        let out = warp_image(&img, &AffineTransform::translation(5.0, 0.0), 12, 4).unwrap();
        for y in 0..4 {
            for x in 0..12 {
                let expected = if x < 5 { [0, 0, 0] } else { img.get(x - 5, y) };
                assert_eq!(out.get(x, y), expected, "({x},{y})");
            }
        }
    }

    #[test]
    fn quarter_turn_permutes_quadrants() {
        // Source quadrants: a b / c d. Rotating clockwise about the centre
        // sends each output centre back to the quadrant counter-clockwise of
        // it: (0.5,0.5) -> (0.5,1.5), (1.5,0.5) -> (0.5,0.5),
        // (1.5,1.5) -> (1.5,0.5), (0.5,1.5) -> (1.5,1.5).
        let (a, b, c, d) = ([255, 0, 0], [0, 255, 0], [0, 0, 255], [255, 255, 0]);
        let img = ImageBuffer::from_fn(2, 2, |x, y| match (x, y) {
            (0, 0) => a,
            (1, 0) => b,
            (0, 1) => c,
            _ => d,
        })
        .unwrap();
        let t = AffineTransform::rotation_about(90.0, Point::new(1.0, 1.0));
        let out = warp_image(&img, &t, 2, 2).unwrap();
        assert_eq!(out.get(0, 0), c);
        assert_eq!(out.get(1, 0), a);
        assert_eq!(out.get(1, 1), b);
        assert_eq!(out.get(0, 1), d);
    }

    #[test]
    fn mask_warp_examples() {
        let mut m = MaskBuffer::new(10, 3).unwrap();
        m.set(0, 0, true);
        assert_eq!(warp_mask(&m, &AffineTransform::identity(), 10, 3).unwrap(), m);
        let shifted = warp_mask(&m, &AffineTransform::translation(5.0, 0.0), 10, 3).unwrap();
        assert_eq!(shifted.count_ones(), 1);
        assert!(shifted.get(5, 0));
        let empty = MaskBuffer::new(10, 3).unwrap();
        let t = AffineTransform::similarity_about(37.0, 2.5, Point::new(3.0, 1.0));
        assert!(warp_mask(&empty, &t, 20, 20).unwrap().is_empty());
    }

    #[test]
    fn gradient_roundtrip_within_tolerance() {
        let (w, h) = (64u32, 64u32);
        let img = ImageBuffer::from_fn(w, h, |x, y| [(x * 3) as u8, (y * 3) as u8, ((x + y) * 2) as u8]).unwrap();
        let centre = Point::new(32.0, 32.0);
        for (theta, s) in [(20.0, 1.1), (-75.0, 0.9), (180.0, 1.0), (7.5, 1.3)] {
            let t = AffineTransform::similarity_about(theta, s, centre);
            let there = warp_image(&img, &t, w, h).unwrap();
            let back = warp_image(&there, &t.inverse().unwrap(), w, h).unwrap();
            let mut checked = 0;
            for y in 0..h {
                for x in 0..w {
                    let mapped = t.apply(Point::new(x as f64 + 0.5, y as f64 + 0.5));
                    let margin = 3.0;
                    let src_inner = x >= 2 && y >= 2 && x < w - 2 && y < h - 2;
                    if !src_inner || mapped.x < margin || mapped.y < margin || mapped.x > w as f64 - margin || mapped.y > h as f64 - margin
                    {
                        continue;
                    }
                    checked += 1;
                    let (a, b) = (img.get(x, y), back.get(x, y));
                    for ch in 0..3 {
                        assert!(
                            (a[ch] as i32 - b[ch] as i32).abs() <= 8,
                            "theta {theta} at ({x},{y}): {a:?} vs {b:?}"
                        );
                    }
                }
            }
            assert!(checked > 1000);
        }
    }

    #[test]
    fn mask_area_scales_with_square_of_scale() {
        let disk = MaskBuffer::from_fn(64, 64, |x, y| {
            let (dx, dy) = (x as f64 + 0.5 - 32.0, y as f64 + 0.5 - 32.0);
            dx * dx + dy * dy <= 14.0 * 14.0
        })
        .unwrap();
        let rect = MaskBuffer::from_fn(64, 64, |x, y| (20..44).contains(&x) && (26..38).contains(&y)).unwrap();
        for mask in [&disk, &rect] {
            let area = mask.count_ones() as f64;
            assert!(area >= 100.0);
            for (theta, s) in [(0.0, 0.7), (30.0, 1.0), (-60.0, 1.5), (135.0, 2.0), (10.0, 0.8)] {
                let t = AffineTransform::similarity_about(theta, s, Point::new(32.0, 32.0)).then(&AffineTransform::translation(32.0, 32.0));
                let warped = warp_mask(mask, &t, 192, 192).unwrap();
                let ratio = warped.count_ones() as f64 / (area * s * s);
                assert!((0.9..=1.1).contains(&ratio), "theta {theta} s {s}: ratio {ratio}");
            }
        }
    }
}
