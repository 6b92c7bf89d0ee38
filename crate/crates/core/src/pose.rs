//! Matching features derived from torso keypoints: orientation from the
//! shoulder line, plus slope and length of the mid-hip → neck segment.
//!
//! Angles are in degrees. Image `y` grows downward, so a positive rotation is
//! clockwise on screen.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::PoseKeypoints;
use crate::raster::Point;

pub const DEFAULT_BIN: f64 = 15.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Up,
    Down,
    Left,
    Right,
}

impl Orientation {
    pub const ALL: [Orientation; 4] = [Orientation::Up, Orientation::Down, Orientation::Left, Orientation::Right];

    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::Up => "up",
            Orientation::Down => "down",
            Orientation::Left => "left",
            Orientation::Right => "right",
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Orientation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Orientation::ALL
            .into_iter()
            .find(|o| o.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown orientation {s:?}")))
    }
}

/// Quantization step for slope (degrees) and height (pixels).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bins {
    pub slope: f64,
    pub height: f64,
}

impl Bins {
    pub fn uniform(bin: f64) -> Self {
        Bins { slope: bin, height: bin }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("slope bin", self.slope), ("height bin", self.height)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

impl Default for Bins {
    fn default() -> Self {
        Bins::uniform(DEFAULT_BIN)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoseDescriptor {
    pub orientation: Orientation,
    /// Torso lean from upright, in (−180, 180].
    pub slope_raw: f64,
    pub slope_q: f64,
    /// Torso length in pixels.
    pub height_raw: f64,
    pub height_q: f64,
    pub mid_hip: Point,
    pub neck: Point,
}

/// Wraps an angle into (−180, 180].
pub fn wrap_degrees(angle: f64) -> f64 {
    let mut a = angle % 360.0;
    if a <= -180.0 {
        a += 360.0;
    } else if a > 180.0 {
        a -= 360.0;
    }
    a
}

pub fn mid_hip(left_hip: Point, right_hip: Point) -> Point {
    left_hip.midpoint(right_hip)
}

/// Four-way direction of the left → right shoulder vector.
pub fn orientation(left_shoulder: Point, right_shoulder: Point) -> Result<Orientation> {
    let dx = right_shoulder.x - left_shoulder.x;
    let dy = right_shoulder.y - left_shoulder.y;
    if dx == 0.0 && dy == 0.0 {
        return Err(Error::DegeneratePose("coincident shoulders"));
    }
    let theta = dy.atan2(dx).to_degrees();
    Ok(if (-45.0..45.0).contains(&theta) {
        Orientation::Right
    } else if (45.0..135.0).contains(&theta) {
        Orientation::Down
    } else if (-135.0..-45.0).contains(&theta) {
        Orientation::Up
    } else {
        Orientation::Left
    })
}

/// Signed angle of hip → neck from the upward vertical, positive when the
/// torso leans toward +x.
pub fn posture_slope(mid_hip: Point, neck: Point) -> Result<f64> {
    let dx = neck.x - mid_hip.x;
    let dy = neck.y - mid_hip.y;
    if dx == 0.0 && dy == 0.0 {
        return Err(Error::DegeneratePose("neck coincides with mid-hip"));
    }
    Ok(wrap_degrees(dx.atan2(-dy).to_degrees()))
}

pub fn height_diff(mid_hip: Point, neck: Point) -> Result<f64> {
    let h = mid_hip.distance(neck);
    if h == 0.0 {
        return Err(Error::DegeneratePose("neck coincides with mid-hip"));
    }
    Ok(h)
}

/// Nearest multiple of `bin`; exact half-bin ties round away from zero.
pub fn quantize(value: f64, bin: f64) -> Result<f64> {
    if bin.is_nan() || bin <= 0.0 {
        return Err(Error::InvalidParameter(format!("bin must be positive, got {bin}")));
    }
    Ok(bucket(value, bin) as f64 * bin)
}

/// Index of the bucket `value` quantizes to.
pub fn bucket(value: f64, bin: f64) -> i64 {
    (value / bin).round() as i64
}

pub fn describe(keypoints: &PoseKeypoints, bins: Bins) -> Result<PoseDescriptor> {
    bins.validate()?;
    let hip = mid_hip(keypoints.left_hip, keypoints.right_hip);
    let neck = keypoints.neck;
    let orientation = orientation(keypoints.left_shoulder, keypoints.right_shoulder)?;
    let slope_raw = posture_slope(hip, neck)?;
    let height_raw = height_diff(hip, neck)?;
    Ok(PoseDescriptor {
        orientation,
        slope_raw,
        slope_q: quantize(slope_raw, bins.slope)?,
        height_raw,
        height_q: quantize(height_raw, bins.height)?,
        mid_hip: hip,
        neck,
    })
}
